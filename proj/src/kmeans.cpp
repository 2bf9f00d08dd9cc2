#include "fsel/kmeans.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fsel/distance.hpp"
#include "fsel/fileio.hpp"
#include "fsel/parallel.hpp"

namespace fsel {

namespace {

void check_fit_inputs(const Eigen::Ref<const Matrix>& points, int k,
                      const char* who) {
  if (points.rows() < 1 || points.cols() < 1)
    throw std::invalid_argument(std::string(who) + ": empty point matrix");
  if (k < 1 || static_cast<Index>(k) > points.rows())
    throw std::invalid_argument(std::string(who) + ": k=" + std::to_string(k) +
                                " must be in [1, n=" +
                                std::to_string(points.rows()) + "]");
}

void assign_step(const Eigen::Ref<const Matrix>& points,
                 const Matrix& centroids, std::vector<int>& assignment) {
  parallel_for(0, points.rows(), [&](Index i) {
    assignment[static_cast<std::size_t>(i)] =
        static_cast<int>(nearest_row(points.row(i), centroids));
  });
}

void count_members(const std::vector<int>& assignment,
                   std::vector<Index>& counts) {
  std::fill(counts.begin(), counts.end(), Index{0});
  for (const int j : assignment) ++counts[static_cast<std::size_t>(j)];
}

// If an update left cluster j empty, move in the point farthest from j's
// current centroid; only points from clusters of size >= 2 are eligible so no
// donor empties in turn. Ties go to the lowest point index.
void repair_empty_clusters(const Eigen::Ref<const Matrix>& points,
                           const Matrix& centroids,
                           std::vector<int>& assignment,
                           std::vector<Index>& counts) {
  const Index n = points.rows();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != 0) continue;
    Index best = -1;
    double best_sq = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (counts[static_cast<std::size_t>(
              assignment[static_cast<std::size_t>(i)])] < 2)
        continue;
      const double sq =
          squared_distance(points.row(i), centroids.row(static_cast<Index>(j)));
      if (sq > best_sq) {
        best_sq = sq;
        best = i;
      }
    }
    // n >= k guarantees some cluster holds at least two points.
    --counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(best)])];
    assignment[static_cast<std::size_t>(best)] = static_cast<int>(j);
    counts[j] = 1;
  }
}

// Centroid sums accumulate in ascending point order, keeping results
// bit-identical at any thread count.
void update_means(const Eigen::Ref<const Matrix>& points,
                  const std::vector<int>& assignment,
                  const std::vector<Index>& counts, Matrix& centroids) {
  centroids.setZero();
  for (Index i = 0; i < points.rows(); ++i)
    centroids.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
  for (Index j = 0; j < centroids.rows(); ++j)
    centroids.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
}

}  // namespace

void validate(const ClusterModel& model) {
  if (model.k < 1)
    throw std::invalid_argument("cluster model: k must be at least 1");
  if (model.centroids.rows() != model.k || model.centroids.cols() < 1)
    throw std::invalid_argument("cluster model: centroid shape mismatch");
  if (model.assignment.empty())
    throw std::invalid_argument("cluster model: empty assignment");
  std::vector<Index> counts(static_cast<std::size_t>(model.k), 0);
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    const int j = model.assignment[i];
    if (j < 0 || j >= model.k)
      throw std::invalid_argument("cluster model: assignment[" +
                                  std::to_string(i) + "] out of range");
    ++counts[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < model.k; ++j)
    if (counts[static_cast<std::size_t>(j)] == 0)
      throw std::invalid_argument("cluster model: cluster " +
                                  std::to_string(j) + " is empty");
  if (!std::isfinite(model.sse) || model.sse < 0.0)
    throw std::invalid_argument("cluster model: invalid sse");
}

Matrix kmeanspp_init(const Eigen::Ref<const Matrix>& points, int k, Rng& rng) {
  check_fit_inputs(points, k, "kmeanspp_init");
  const Index n = points.rows();
  Matrix centers(k, points.cols());

  const Index first =
      static_cast<Index>(rng.next_index(static_cast<std::uint64_t>(n)));
  centers.row(0) = points.row(first);

  Vector dmin(n);
  parallel_for(0, n, [&](Index i) {
    dmin(i) = squared_distance(points.row(i), centers.row(0));
  });

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += dmin(i);
    if (!(total > 0.0))
      throw std::runtime_error(
          "kmeanspp_init: fewer than k distinct points (only " +
          std::to_string(c) + " distinct, k=" + std::to_string(k) + ")");

    // Inverse-CDF walk over the D^2 weights; zero-weight points (exact
    // duplicates of chosen centers) can never be picked.
    const double r = rng.next_double() * total;
    double cum = 0.0;
    Index pick = -1;
    Index last_positive = -1;
    for (Index i = 0; i < n; ++i) {
      if (dmin(i) > 0.0) last_positive = i;
      cum += dmin(i);
      if (cum > r) {
        pick = i;
        break;
      }
    }
    if (pick < 0) pick = last_positive;  // r hit the total due to rounding

    centers.row(c) = points.row(pick);
    parallel_for(0, n, [&](Index i) {
      const double sq = squared_distance(points.row(i), centers.row(c));
      if (sq < dmin(i)) dmin(i) = sq;
    });
  }
  return centers;
}

ClusterModel lloyd(const Eigen::Ref<const Matrix>& points,
                   const Eigen::Ref<const Matrix>& init, int max_iterations,
                   double rel_tolerance, std::vector<double>* sse_trace) {
  const int k = static_cast<int>(init.rows());
  check_fit_inputs(points, k, "lloyd");
  if (init.cols() != points.cols())
    throw std::invalid_argument(
        "lloyd: dimension mismatch: points have d=" +
        std::to_string(points.cols()) + ", init has d=" +
        std::to_string(init.cols()));
  if (max_iterations < 1)
    throw std::invalid_argument("lloyd: max_iterations must be at least 1");
  if (!(rel_tolerance > 0.0))
    throw std::invalid_argument("lloyd: rel_tolerance must be positive");

  const Index n = points.rows();
  Matrix centroids = init;
  std::vector<int> assignment(static_cast<std::size_t>(n));
  std::vector<Index> counts(static_cast<std::size_t>(k));
  if (sse_trace) sse_trace->clear();

  assign_step(points, centroids, assignment);
  count_members(assignment, counts);
  repair_empty_clusters(points, centroids, assignment, counts);
  update_means(points, assignment, counts, centroids);
  double current = sse(points, centroids, assignment);
  if (sse_trace) sse_trace->push_back(current);
  int iterations = 1;

  std::vector<int> next(static_cast<std::size_t>(n));
  while (iterations < max_iterations) {
    assign_step(points, centroids, next);
    if (next == assignment) break;  // fixpoint; centroids already match
    assignment.swap(next);
    count_members(assignment, counts);
    repair_empty_clusters(points, centroids, assignment, counts);
    update_means(points, assignment, counts, centroids);
    const double updated = sse(points, centroids, assignment);
    ++iterations;
    if (sse_trace) sse_trace->push_back(updated);
    const bool converged =
        current <= 0.0 || (current - updated) / current < rel_tolerance;
    current = updated;
    if (converged) break;
  }

  ClusterModel model;
  model.k = k;
  model.centroids = std::move(centroids);
  model.assignment = std::move(assignment);
  model.sse = current;
  model.iterations = iterations;
  return model;
}

ClusterModel fit(const Eigen::Ref<const Matrix>& points,
                 const KMeansConfig& config, FitReport* report) {
  check_fit_inputs(points, config.k, "fit");
  if (config.n_restarts < 1)
    throw std::invalid_argument("fit: n_restarts must be at least 1");
  if (report) {
    report->restart_seeds.clear();
    report->restart_sse.clear();
    report->best_restart = -1;
  }

  ClusterModel best;
  int best_restart = -1;
  for (int r = 0; r < config.n_restarts; ++r) {
    const std::uint64_t sub_seed = mix_seed(config.seed, r);
    Rng rng(sub_seed);
    const Matrix init = kmeanspp_init(points, config.k, rng);
    ClusterModel model = lloyd(points, init, config.max_iterations,
                               config.rel_tolerance);
    model.seed = sub_seed;
    if (report) {
      report->restart_seeds.push_back(sub_seed);
      report->restart_sse.push_back(model.sse);
    }
    if (best_restart < 0 || model.sse < best.sse) {
      best = std::move(model);
      best_restart = r;
    }
  }
  if (report) report->best_restart = best_restart;
  return best;
}

ClusterModel brute_force_kmeans(const Eigen::Ref<const Matrix>& points, int k) {
  check_fit_inputs(points, k, "brute_force_kmeans");
  const Index n = points.rows();
  const Index d = points.cols();

  constexpr std::uint64_t kMaxCombos = 2'000'000;
  std::uint64_t combos = 1;
  for (Index i = 0; i < n; ++i) {
    combos *= static_cast<std::uint64_t>(k);
    if (combos > kMaxCombos)
      throw std::runtime_error(
          "brute_force_kmeans: instance too large (k^n exceeds " +
          std::to_string(kMaxCombos) + ")");
  }

  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::vector<Index> counts(static_cast<std::size_t>(k));
  Matrix means(k, d);
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<int> best_a;

  for (;;) {
    count_members(a, counts);
    bool surjective = true;
    for (const Index c : counts)
      if (c == 0) {
        surjective = false;
        break;
      }
    if (surjective) {
      update_means(points, a, counts, means);
      const double s = sse(points, means, a);
      if (s < best_sse) {
        best_sse = s;
        best_a = a;
      }
    }
    // odometer increment, last digit fastest
    Index pos = n - 1;
    while (pos >= 0) {
      int& digit = a[static_cast<std::size_t>(pos)];
      if (++digit == k) {
        digit = 0;
        --pos;
      } else {
        break;
      }
    }
    if (pos < 0) break;
  }

  ClusterModel model;
  model.k = k;
  model.assignment = std::move(best_a);
  count_members(model.assignment, counts);
  model.centroids.resize(k, d);
  update_means(points, model.assignment, counts, model.centroids);
  model.sse = sse(points, model.centroids, model.assignment);
  model.iterations = 0;
  return model;
}

std::string encode_model(const ClusterModel& model, const FitReport* report) {
  nlohmann::json doc;
  doc["format"] = "fsel.cluster_model";
  doc["version"] = kFormatVersion;
  doc["k"] = model.k;
  doc["n"] = model.assignment.size();
  doc["d"] = model.centroids.cols();
  doc["seed"] = model.seed;
  doc["iterations"] = model.iterations;
  doc["sse"] = model.sse;
  auto centroids = nlohmann::json::array();
  for (Index i = 0; i < model.centroids.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < model.centroids.cols(); ++j)
      row.push_back(model.centroids(i, j));
    centroids.push_back(std::move(row));
  }
  doc["centroids"] = std::move(centroids);
  doc["assignment"] = model.assignment;
  if (report) {
    doc["fit"] = {{"restart_seeds", report->restart_seeds},
                  {"restart_sse", report->restart_sse},
                  {"best_restart", report->best_restart}};
  }
  return doc.dump(2) + "\n";
}

ClusterModel decode_model(const std::string& text, const std::string& context) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "fsel.cluster_model")
      throw std::runtime_error("not a cluster model document");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw std::runtime_error("unsupported version");
    ClusterModel model;
    model.k = doc.at("k").get<int>();
    const auto n = doc.at("n").get<std::size_t>();
    const auto d = doc.at("d").get<Index>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.iterations = doc.at("iterations").get<int>();
    model.sse = doc.at("sse").get<double>();
    const auto& centroids = doc.at("centroids");
    if (static_cast<int>(centroids.size()) != model.k)
      throw std::runtime_error("centroid count does not match k");
    model.centroids.resize(model.k, d);
    for (int i = 0; i < model.k; ++i) {
      const auto& row = centroids.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != d)
        throw std::runtime_error("centroid row " + std::to_string(i) +
                                 " has wrong dimension");
      for (Index j = 0; j < d; ++j)
        model.centroids(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    model.assignment = doc.at("assignment").get<std::vector<int>>();
    if (model.assignment.size() != n)
      throw std::runtime_error("assignment length does not match n");
    validate(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(context + ": invalid cluster model: " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": invalid cluster model: " + e.what());
  }
}

void write_model(const ClusterModel& model, const std::filesystem::path& path,
                 const FitReport* report) {
  validate(model);
  write_file_atomic(path, encode_model(model, report));
}

ClusterModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file(path), path.string());
}

}  // namespace fsel
