#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "fsel/eval.hpp"
#include "fsel/rng.hpp"
#include "helpers.hpp"

using fsel::Index;
using fsel::Matrix;
using fsel::Metric;
using fsel::MixtureSpec;
using fsel::Strategy;

namespace {

MixtureSpec make_mixture_spec(Index n, Index d, int components,
                              double separation, std::uint64_t seed) {
  MixtureSpec spec;
  spec.n = n;
  spec.d = d;
  spec.components = components;
  spec.separation = separation;
  spec.seed = seed;
  return spec;
}

// Independent double-loop restatement of the facility-location objective.
double brute_facility(const Matrix& points, const std::vector<Index>& sel) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Index s : sel) {
      double sq = 0.0;
      for (Index j = 0; j < points.cols(); ++j) {
        const double diff = points(i, j) - points(s, j);
        sq += diff * diff;
      }
      best = std::min(best, sq);
    }
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("metric names round-trip") {
  for (const Metric m : fsel::all_metrics())
    CHECK(fsel::parse_metric(fsel::metric_name(m)) == m);
  CHECK_THROWS_AS(fsel::parse_metric("bleu"), std::invalid_argument);
}

TEST_CASE("generate_mixture is deterministic and balanced") {
  const MixtureSpec spec = make_mixture_spec(103, 5, 4, 3.0, 9);
  const fsel::Mixture a = fsel::generate_mixture(spec);
  const fsel::Mixture b = fsel::generate_mixture(spec);
  CHECK(a.points.data == b.points.data);  // bit-identical
  CHECK(a.labels == b.labels);

  // 103 = 4*25 + 3: the first three components get 26, the last 25
  std::vector<int> counts(4, 0);
  for (const int label : a.labels) ++counts[label];
  CHECK(counts == std::vector<int>{26, 26, 26, 25});
  CHECK(a.points.rows() == 103);
  CHECK(a.points.cols() == 5);
  CHECK(a.centers.rows() == 4);
}

TEST_CASE("generate_mixture centers honour the minimum separation") {
  const fsel::Mixture m =
      fsel::generate_mixture(make_mixture_spec(40, 6, 8, 5.0, 21));
  double min_dist = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < m.centers.rows(); ++a)
    for (Index b = a + 1; b < m.centers.rows(); ++b)
      min_dist = std::min(min_dist, (m.centers.row(a) - m.centers.row(b)).norm());
  CHECK(min_dist == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("single-component mixture concentrates around its center") {
  const fsel::Mixture m =
      fsel::generate_mixture(make_mixture_spec(400, 3, 1, 1.0, 5));
  for (Index j = 0; j < 3; ++j) {
    const double mean = m.points.data.col(j).mean();
    CHECK(std::abs(mean - m.centers(0, j)) < 4.0 / std::sqrt(400.0));
  }
}

TEST_CASE("high separation makes nearest-center recovery exact") {
  const fsel::Mixture m =
      fsel::generate_mixture(make_mixture_spec(120, 4, 2, 100.0, 31));
  for (Index i = 0; i < m.points.rows(); ++i) {
    Index nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < m.centers.rows(); ++c) {
      const double d = (m.points.data.row(i) - m.centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    REQUIRE(static_cast<int>(nearest) == m.labels[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("generate_mixture validates its spec") {
  CHECK_THROWS_AS(fsel::generate_mixture(make_mixture_spec(3, 2, 4, 1.0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::generate_mixture(make_mixture_spec(3, 0, 1, 1.0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::generate_mixture(make_mixture_spec(3, 2, 1, 0.0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::generate_mixture(make_mixture_spec(3, 2, 0, 1.0, 1)),
                  std::invalid_argument);
}

TEST_CASE("facility location cost matches fixed examples and the oracle") {
  Matrix two(2, 1);
  two << 0, 2;
  CHECK(fsel::facility_location_cost(two, {0}) == 4.0);
  CHECK(fsel::facility_location_cost(two, {0, 1}) == 0.0);

  const Matrix points = testutil::random_matrix(60, 4, 17, 3.0);
  std::vector<Index> sel = {3, 11, 29, 58};
  CHECK(fsel::facility_location_cost(points, sel) ==
        doctest::Approx(brute_facility(points, sel)).epsilon(1e-12));

  std::vector<Index> all(60);
  for (Index i = 0; i < 60; ++i) all[static_cast<std::size_t>(i)] = i;
  CHECK(fsel::facility_location_cost(points, all) == 0.0);
}

TEST_CASE("facility location is monotone under additions") {
  const Matrix points = testutil::random_matrix(50, 3, 23, 2.0);
  std::vector<Index> sel = {7};
  double prev = fsel::facility_location_cost(points, sel);
  for (const Index extra : {Index{13}, Index{2}, Index{41}, Index{30}}) {
    sel.push_back(extra);
    const double next = fsel::facility_location_cost(points, sel);
    CHECK(next <= prev);
    prev = next;
  }
}

TEST_CASE("coverage radius matches fixed examples and bounds") {
  Matrix three(3, 1);
  three << 0, 1, 2;
  CHECK(fsel::coverage_radius(three, {1}) == 1.0);
  std::vector<Index> all = {0, 1, 2};
  CHECK(fsel::coverage_radius(three, all) == 0.0);

  const Matrix points = testutil::random_matrix(40, 5, 29, 2.0);
  const std::vector<Index> sel = {1, 17, 33};
  const double radius = fsel::coverage_radius(points, sel);
  const double cost = fsel::facility_location_cost(points, sel);
  CHECK(radius <= std::sqrt(cost) + 1e-12);
  // oracle: max over min distances
  double expect = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Index s : sel)
      best = std::min(best, (points.row(i) - points.row(s)).norm());
    expect = std::max(expect, best);
  }
  CHECK(radius == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("diversity matches fixed examples and a pairwise oracle") {
  Matrix m(3, 1);
  m << 0, 3, 10;
  CHECK(fsel::diversity(m, {0, 1, 2}) == 3.0);

  Matrix dup(2, 2);
  dup << 1, 1, 1, 1;
  CHECK(fsel::diversity(dup, {0, 1}) == 0.0);

  const Matrix points = testutil::random_matrix(30, 4, 37, 2.0);
  const std::vector<Index> sel = {2, 9, 15, 28};
  double expect = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sel.size(); ++a)
    for (std::size_t b = a + 1; b < sel.size(); ++b)
      expect = std::min(expect,
                        (points.row(sel[a]) - points.row(sel[b])).norm());
  CHECK(fsel::diversity(points, sel) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("metrics validate their selections") {
  const Matrix points = testutil::random_matrix(10, 2, 41);
  CHECK_THROWS_AS(fsel::facility_location_cost(points, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::facility_location_cost(points, {3, 3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::facility_location_cost(points, {10}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::coverage_radius(points, {-1}), std::invalid_argument);
  CHECK_THROWS_AS(fsel::diversity(points, {4}), std::invalid_argument);
}

TEST_CASE("metrics are permutation and translation invariant") {
  const Matrix points = testutil::random_matrix(35, 3, 43, 2.0);
  const std::vector<Index> sel = {4, 12, 20, 33};
  std::vector<Index> shuffled = {33, 4, 20, 12};
  for (const Metric metric : fsel::all_metrics())
    CHECK(fsel::score(metric, points, sel) ==
          fsel::score(metric, points, shuffled));

  Matrix shifted = points;
  fsel::Vector offset(3);
  offset << 100.0, -250.0, 3.5;
  shifted.rowwise() += offset.transpose();
  for (const Metric metric : fsel::all_metrics())
    CHECK(fsel::score(metric, shifted, sel) ==
          doctest::Approx(fsel::score(metric, points, sel)).epsilon(1e-9));
}

TEST_CASE("compare_strategies with one trial degenerates to a point") {
  const Matrix points =
      fsel::generate_mixture(make_mixture_spec(80, 4, 4, 6.0, 3)).points.data;
  const auto reports = fsel::compare_strategies(
      points, {Strategy::kRandom}, 5, 1, 7, Metric::kFacilityLocation);
  REQUIRE(reports.size() == 1);
  const auto& r = reports[0];
  CHECK(r.trials == 1);
  CHECK(r.std_dev == 0.0);
  CHECK(r.mean == r.min);
  CHECK(r.mean == r.max);
  CHECK(r.per_trial.size() == 1);
  CHECK(r.mean == r.per_trial[0]);
}

TEST_CASE("trial reports are recomputable from per-trial values") {
  const Matrix points =
      fsel::generate_mixture(make_mixture_spec(150, 6, 5, 5.0, 13)).points.data;
  const auto reports = fsel::compare_strategies(
      points, {Strategy::kRandom, Strategy::kKMeansClosest}, 5, 10, 21,
      Metric::kFacilityLocation);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    REQUIRE(r.per_trial.size() == 10);
    double mean = 0.0;
    for (const double v : r.per_trial) mean += v;
    mean /= 10.0;
    double var = 0.0;
    for (const double v : r.per_trial) var += (v - mean) * (v - mean);
    const double std_dev = std::sqrt(var / 10.0);
    CHECK(std::abs(r.mean - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(r.std_dev - std_dev) <= 1e-12 * std::max(1.0, std_dev));
    CHECK(r.min == *std::min_element(r.per_trial.begin(), r.per_trial.end()));
    CHECK(r.max == *std::max_element(r.per_trial.begin(), r.per_trial.end()));
    CHECK(r.min <= r.mean);
    CHECK(r.mean <= r.max);
    // trial seeds follow the documented derivation from the base seed
    for (int t = 0; t < 10; ++t)
      CHECK(r.trial_seeds[static_cast<std::size_t>(t)] ==
            fsel::mix_seed(21, t));
  }
}

TEST_CASE("compare_strategies is deterministic in the base seed") {
  const Matrix points =
      fsel::generate_mixture(make_mixture_spec(90, 4, 3, 5.0, 17)).points.data;
  const auto a = fsel::compare_strategies(points, {Strategy::kKMeansRandom}, 3,
                                          4, 5, Metric::kCoverageRadius);
  const auto b = fsel::compare_strategies(points, {Strategy::kKMeansRandom}, 3,
                                          4, 5, Metric::kCoverageRadius);
  CHECK(a[0].per_trial == b[0].per_trial);
}

TEST_CASE("csv output has one row per strategy-trial pair") {
  const Matrix points =
      fsel::generate_mixture(make_mixture_spec(60, 3, 3, 6.0, 2)).points.data;
  const auto reports = fsel::compare_strategies(
      points, {Strategy::kRandom, Strategy::kInClusterRandom,
               Strategy::kKMeansClosest},
      5, 10, 0, Metric::kFacilityLocation);
  const std::string csv = fsel::to_csv(reports);

  std::istringstream stream(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(stream, line)) lines.push_back(line);
  REQUIRE(lines.size() == 31);  // header + 3 strategies x 10 trials
  CHECK(lines[0] == "strategy,metric,trial,seed,value");
  CHECK(lines[1].rfind("random,facility-location,0,", 0) == 0);
  CHECK(lines[11].rfind("ic-random,facility-location,0,", 0) == 0);
  // every data row has exactly 4 commas
  for (std::size_t i = 1; i < lines.size(); ++i)
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 4);
  // values parse back as finite doubles
  const std::string last = lines.back();
  const double value = std::stod(last.substr(last.rfind(',') + 1));
  CHECK(std::isfinite(value));
}

TEST_CASE("format_reports emits one line per report plus a header") {
  const Matrix points =
      fsel::generate_mixture(make_mixture_spec(50, 3, 2, 6.0, 4)).points.data;
  const auto reports = fsel::compare_strategies(
      points, {Strategy::kRandom, Strategy::kKMeansClosest}, 2, 3, 1,
      Metric::kDiversity);
  const std::string text = fsel::format_reports(reports);
  std::istringstream stream(text);
  std::string line;
  int count = 0;
  while (std::getline(stream, line)) ++count;
  CHECK(count == 3);
  CHECK(text.find("kmeans-closest") != std::string::npos);
  CHECK(text.find("diversity") != std::string::npos);
}
