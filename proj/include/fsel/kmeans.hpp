#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"

namespace fsel {

struct KMeansConfig {
  int k = 1;
  int n_restarts = 10;  // independent seedings; the minimum-SSE model wins
  int max_iterations = 300;
  double rel_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// A converged clustering. Invariants: every cluster in [0, k) is non-empty,
/// each centroid is the mean of its assigned points, and `sse` matches a
/// recomputation from (centroids, assignment).
struct ClusterModel {
  int k = 0;
  Matrix centroids;             // k x d
  std::vector<int> assignment;  // length n, values in [0, k)
  double sse = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;  // sub-seed of the restart that produced the model
};

/// Per-restart diagnostics from fit().
struct FitReport {
  std::vector<std::uint64_t> restart_seeds;
  std::vector<double> restart_sse;
  int best_restart = -1;
};

/// Throws std::invalid_argument if the model violates ClusterModel
/// invariants (structural checks; points are not needed).
void validate(const ClusterModel& model);

/// K-means++ seeding: first center uniform over points, each next center
/// drawn with probability proportional to the squared distance to its
/// nearest already-chosen center. Returns k rows copied from `points`.
/// Requires at least k distinct points.
Matrix kmeanspp_init(const Eigen::Ref<const Matrix>& points, int k, Rng& rng);

/// Lloyd iterations from the given initial centroids. Assignment ties go to
/// the lowest cluster index; a cluster left empty by an update is repaired by
/// moving in the point farthest from that cluster's centroid (donors keep at
/// least one point). Stops on an assignment fixpoint, a relative SSE
/// improvement below rel_tolerance, or max_iterations. When `sse_trace` is
/// given it receives the SSE after every update, which is non-increasing.
ClusterModel lloyd(const Eigen::Ref<const Matrix>& points,
                   const Eigen::Ref<const Matrix>& init, int max_iterations,
                   double rel_tolerance,
                   std::vector<double>* sse_trace = nullptr);

/// Runs config.n_restarts independent kmeanspp_init + lloyd rounds, restart r
/// seeded with mix_seed(config.seed, r), and returns the minimum-SSE model
/// (ties to the lowest restart index).
ClusterModel fit(const Eigen::Ref<const Matrix>& points,
                 const KMeansConfig& config, FitReport* report = nullptr);

/// Exhaustive search over all surjective assignments of points to k clusters;
/// the global SSE optimum. Guarded to k^n <= 2,000,000. Testing oracle.
ClusterModel brute_force_kmeans(const Eigen::Ref<const Matrix>& points, int k);

// Versioned JSON document with k, n, d, seed, iterations, sse, centroids,
// assignment; write_model optionally embeds the FitReport for auditability.
std::string encode_model(const ClusterModel& model,
                         const FitReport* report = nullptr);
ClusterModel decode_model(const std::string& text, const std::string& context);

void write_model(const ClusterModel& model, const std::filesystem::path& path,
                 const FitReport* report = nullptr);
ClusterModel load_model(const std::filesystem::path& path);

}  // namespace fsel
