#include "fsel/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fsel/distance.hpp"
#include "fsel/parallel.hpp"
#include "fsel/rng.hpp"

namespace fsel {

namespace {

struct MetricName {
  Metric metric;
  const char* name;
};

constexpr MetricName kMetricNames[] = {
    {Metric::kFacilityLocation, "facility-location"},
    {Metric::kCoverageRadius, "coverage-radius"},
    {Metric::kDiversity, "diversity"},
};

// Shortest decimal form that parses back to the same double.
std::string format_value(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void check_indices(const Eigen::Ref<const Matrix>& points,
                   const std::vector<Index>& indices, const char* who) {
  if (indices.empty())
    throw std::invalid_argument(std::string(who) + ": empty selection");
  std::vector<Index> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= points.rows())
    throw std::invalid_argument(std::string(who) + ": index out of range (n=" +
                                std::to_string(points.rows()) + ")");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument(std::string(who) + ": duplicate index");
}

// Per-point squared distance to the nearest selected point. Each entry is
// computed independently, so the parallel fill is bit-deterministic; callers
// reduce sequentially in ascending order.
Vector nearest_selected_sq(const Eigen::Ref<const Matrix>& points,
                           const std::vector<Index>& indices) {
  Vector dmin(points.rows());
  parallel_for(0, points.rows(), [&](Index i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Index s : indices)
      best = std::min(best, squared_distance(points.row(i), points.row(s)));
    dmin(i) = best;
  });
  return dmin;
}

}  // namespace

std::string metric_name(Metric metric) {
  for (const auto& entry : kMetricNames)
    if (entry.metric == metric) return entry.name;
  throw std::logic_error("unknown metric value");
}

Metric parse_metric(const std::string& name) {
  for (const auto& entry : kMetricNames)
    if (name == entry.name) return entry.metric;
  std::string known;
  for (const auto& entry : kMetricNames) {
    if (!known.empty()) known += ", ";
    known += entry.name;
  }
  throw std::invalid_argument("unknown metric '" + name + "' (expected " +
                              known + ")");
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> kAll = {
      Metric::kFacilityLocation, Metric::kCoverageRadius, Metric::kDiversity};
  return kAll;
}

Mixture generate_mixture(const MixtureSpec& spec) {
  if (spec.components < 1)
    throw std::invalid_argument("generate_mixture: components must be >= 1");
  if (spec.n < spec.components)
    throw std::invalid_argument("generate_mixture: n=" +
                                std::to_string(spec.n) + " is below components=" +
                                std::to_string(spec.components));
  if (spec.d < 1)
    throw std::invalid_argument("generate_mixture: d must be >= 1");
  if (!(spec.separation > 0.0))
    throw std::invalid_argument("generate_mixture: separation must be > 0");

  Rng rng(spec.seed);
  const int c = spec.components;

  Matrix centers(c, spec.d);
  for (Index i = 0; i < centers.rows(); ++i)
    for (Index j = 0; j < centers.cols(); ++j)
      centers(i, j) = rng.next_gaussian();

  if (c > 1) {
    double min_sq = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < centers.rows(); ++a)
      for (Index b = a + 1; b < centers.rows(); ++b)
        min_sq = std::min(min_sq,
                          squared_distance(centers.row(a), centers.row(b)));
    if (!(min_sq > 0.0))
      throw std::runtime_error(
          "generate_mixture: coincident centers drawn; use another seed");
    centers *= spec.separation / std::sqrt(min_sq);
  }

  Mixture mixture;
  mixture.points.data.resize(spec.n, spec.d);
  mixture.labels.resize(static_cast<std::size_t>(spec.n));

  const Index base = spec.n / c;
  const Index remainder = spec.n % c;
  Index row = 0;
  for (int comp = 0; comp < c; ++comp) {
    const Index count = base + (static_cast<Index>(comp) < remainder ? 1 : 0);
    for (Index p = 0; p < count; ++p, ++row) {
      for (Index j = 0; j < spec.d; ++j)
        mixture.points.data(row, j) = centers(comp, j) + rng.next_gaussian();
      mixture.labels[static_cast<std::size_t>(row)] = comp;
    }
  }
  mixture.centers = std::move(centers);
  return mixture;
}

double facility_location_cost(const Eigen::Ref<const Matrix>& points,
                              const std::vector<Index>& indices) {
  check_indices(points, indices, "facility_location_cost");
  const Vector dmin = nearest_selected_sq(points, indices);
  double total = 0.0;
  for (Index i = 0; i < dmin.size(); ++i) total += dmin(i);
  return total;
}

double coverage_radius(const Eigen::Ref<const Matrix>& points,
                       const std::vector<Index>& indices) {
  check_indices(points, indices, "coverage_radius");
  const Vector dmin = nearest_selected_sq(points, indices);
  double worst = 0.0;
  for (Index i = 0; i < dmin.size(); ++i) worst = std::max(worst, dmin(i));
  return std::sqrt(worst);
}

double diversity(const Eigen::Ref<const Matrix>& points,
                 const std::vector<Index>& indices) {
  check_indices(points, indices, "diversity");
  if (indices.size() < 2)
    throw std::invalid_argument("diversity: needs at least 2 selected points");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < indices.size(); ++a)
    for (std::size_t b = a + 1; b < indices.size(); ++b)
      best = std::min(best, squared_distance(points.row(indices[a]),
                                             points.row(indices[b])));
  return std::sqrt(best);
}

double score(Metric metric, const Eigen::Ref<const Matrix>& points,
             const std::vector<Index>& indices) {
  switch (metric) {
    case Metric::kFacilityLocation:
      return facility_location_cost(points, indices);
    case Metric::kCoverageRadius:
      return coverage_radius(points, indices);
    case Metric::kDiversity:
      return diversity(points, indices);
  }
  throw std::logic_error("unreachable");
}

void validate(const TrialReport& report) {
  if (report.trials < 1)
    throw std::invalid_argument("trial report: trials must be >= 1");
  if (report.per_trial.size() != static_cast<std::size_t>(report.trials) ||
      report.trial_seeds.size() != static_cast<std::size_t>(report.trials))
    throw std::invalid_argument("trial report: per-trial length mismatch");
  if (!(report.min <= report.mean && report.mean <= report.max))
    throw std::invalid_argument("trial report: min <= mean <= max violated");
  if (!(report.std_dev >= 0.0))
    throw std::invalid_argument("trial report: negative std");
}

std::vector<TrialReport> compare_strategies(
    const Eigen::Ref<const Matrix>& points,
    const std::vector<Strategy>& strategies, int k, int trials,
    std::uint64_t base_seed, Metric metric) {
  if (strategies.empty())
    throw std::invalid_argument("compare_strategies: no strategies given");
  if (trials < 1)
    throw std::invalid_argument("compare_strategies: trials must be >= 1");

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t)
    seeds[static_cast<std::size_t>(t)] = mix_seed(base_seed, t);

  std::vector<TrialReport> reports;
  reports.reserve(strategies.size());
  for (const Strategy strategy : strategies) {
    TrialReport report;
    report.strategy = strategy;
    report.metric = metric_name(metric);
    report.trials = trials;
    report.trial_seeds = seeds;
    report.per_trial.resize(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      SelectionSpec spec;
      spec.strategy = strategy;
      spec.k = k;
      spec.seed = seeds[static_cast<std::size_t>(t)];
      const SelectionResult result = select(points, spec);
      report.per_trial[static_cast<std::size_t>(t)] =
          score(metric, points, result.indices);
    }
    report.min = *std::min_element(report.per_trial.begin(),
                                   report.per_trial.end());
    report.max = *std::max_element(report.per_trial.begin(),
                                   report.per_trial.end());
    double total = 0.0;
    for (const double v : report.per_trial) total += v;
    // The exact mean lies in [min, max]; rounding in the sum can land one ulp
    // outside (e.g. identical trials), so clamp it back.
    report.mean = std::clamp(total / trials, report.min, report.max);
    double sq_dev = 0.0;
    for (const double v : report.per_trial)
      sq_dev += (v - report.mean) * (v - report.mean);
    report.std_dev = std::sqrt(sq_dev / trials);
    validate(report);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string to_csv(const std::vector<TrialReport>& reports) {
  std::string out = "strategy,metric,trial,seed,value\n";
  for (const TrialReport& report : reports) {
    for (int t = 0; t < report.trials; ++t) {
      out += strategy_name(report.strategy);
      out += ',';
      out += report.metric;
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += std::to_string(report.trial_seeds[static_cast<std::size_t>(t)]);
      out += ',';
      out += format_value(report.per_trial[static_cast<std::size_t>(t)]);
      out += '\n';
    }
  }
  return out;
}

std::string format_reports(const std::vector<TrialReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-18s %6s %14s %14s %14s %14s\n",
                "strategy", "metric", "trials", "mean", "std", "min", "max");
  out += line;
  for (const TrialReport& report : reports) {
    std::snprintf(line, sizeof line,
                  "%-16s %-18s %6d %14.6g %14.6g %14.6g %14.6g\n",
                  strategy_name(report.strategy).c_str(),
                  report.metric.c_str(), report.trials, report.mean,
                  report.std_dev, report.min, report.max);
    out += line;
  }
  return out;
}

}  // namespace fsel
