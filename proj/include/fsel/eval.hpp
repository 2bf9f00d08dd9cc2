#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsel/core.hpp"
#include "fsel/embedding.hpp"
#include "fsel/select.hpp"

namespace fsel {

// Label-free representativeness proxies. A good selection sits close to every
// point (facility location, coverage radius) while its members stay far from
// each other (diversity). These stand in for downstream task scores, which
// would require training a model on the selected instances.
enum class Metric { kFacilityLocation, kCoverageRadius, kDiversity };

// Stable kebab-case names: facility-location, coverage-radius, diversity.
std::string metric_name(Metric metric);
Metric parse_metric(const std::string& name);
const std::vector<Metric>& all_metrics();

// Synthetic Gaussian-mixture testbed. Component centers are drawn from an
// isotropic normal and rescaled so the minimum pairwise center distance
// equals separation x the component standard deviation (fixed at 1); exact
// pairwise-equidistant placement is impossible beyond d+1 components, so the
// minimum is the guaranteed bound. Counts are balanced with the remainder
// going to the earliest components.
struct MixtureSpec {
  Index n = 1;
  Index d = 1;
  int components = 1;
  double separation = 1.0;
  std::uint64_t seed = 0;
};

struct Mixture {
  EmbeddingMatrix points;      // n x d, no ids; rows grouped by component
  std::vector<int> labels;     // ground-truth component per row
  Matrix centers;              // components x d, after rescaling
};

Mixture generate_mixture(const MixtureSpec& spec);

// sum_i min_{s in indices} ||x_i - x_s||^2. Indices must be non-empty,
// distinct, and in range; throws std::invalid_argument otherwise.
double facility_location_cost(const Eigen::Ref<const Matrix>& points,
                              const std::vector<Index>& indices);

// max_i min_{s in indices} ||x_i - x_s|| (plain Euclidean).
double coverage_radius(const Eigen::Ref<const Matrix>& points,
                       const std::vector<Index>& indices);

// Minimum pairwise Euclidean distance among the selected points; needs at
// least two indices.
double diversity(const Eigen::Ref<const Matrix>& points,
                 const std::vector<Index>& indices);

double score(Metric metric, const Eigen::Ref<const Matrix>& points,
             const std::vector<Index>& indices);

// Per-strategy summary of one metric over T trials. std is the population
// standard deviation (T denominator): the spread of exactly these T runs.
struct TrialReport {
  Strategy strategy = Strategy::kRandom;
  std::string metric;
  int trials = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> per_trial;
  std::vector<std::uint64_t> trial_seeds;
};

void validate(const TrialReport& report);

// The multi-trial comparison protocol: for every strategy, trial t runs
// select(points, {strategy, k, mix_seed(base_seed, t)}) and scores it with
// the metric. All strategies see the same trial seeds. Deterministic in
// base_seed; reports come back in strategy order.
std::vector<TrialReport> compare_strategies(
    const Eigen::Ref<const Matrix>& points,
    const std::vector<Strategy>& strategies, int k, int trials,
    std::uint64_t base_seed, Metric metric);

// CSV with columns strategy,metric,trial,seed,value — one row per trial.
std::string to_csv(const std::vector<TrialReport>& reports);

// Human-readable table: one line per report with mean/std/min/max.
std::string format_reports(const std::vector<TrialReport>& reports);

}  // namespace fsel
