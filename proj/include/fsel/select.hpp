#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fsel/core.hpp"
#include "fsel/kmeans.hpp"

namespace fsel {

// Budget-constrained instance selection. Five strategies: uniform random
// sampling, in-cluster random sampling (all k drawn from a single cluster),
// and k-means selection with three in-cluster picks (closest to centroid —
// the headline method — plus random and farthest ablations).
enum class Strategy {
  kRandom,
  kInClusterRandom,
  kKMeansClosest,
  kKMeansRandom,
  kKMeansFarthest,
};

enum class InClusterPick { kClosest, kRandom, kFarthest };

// Stable kebab-case names used on the CLI and in serialized results:
// random, ic-random, kmeans-closest, kmeans-random, kmeans-farthest.
std::string strategy_name(Strategy strategy);
Strategy parse_strategy(const std::string& name);
const std::vector<Strategy>& all_strategies();

// A selection run is fully determined by (data, spec).
struct SelectionSpec {
  Strategy strategy = Strategy::kKMeansClosest;
  int k = 1;
  std::uint64_t seed = 0;
};

// Where a selected index came from: its cluster and its plain Euclidean
// distance to that cluster's centroid.
struct Provenance {
  int cluster = 0;
  double distance = 0.0;
};

struct SelectionResult {
  SelectionSpec spec;
  // k distinct indices into the point matrix. For kmeans-* strategies entry
  // j is cluster j's pick; for random / ic-random they are sorted ascending.
  std::vector<Index> indices;
  // Parallel to indices; empty for the random strategy (no clustering ran).
  std::vector<Provenance> provenance;
};

void validate(const SelectionResult& result);

// Runs the named strategy. kmeans-* and ic-random first fit k-means with
// KMeansConfig{k = spec.k, seed = spec.seed} and library defaults; all
// selector-level draws come from an Rng seeded with
// mix_seed(spec.seed, kSelectionStream) so they never overlap the restart
// streams consumed by the fit. Throws std::invalid_argument for an invalid
// spec (k < 1 or k > n) and std::runtime_error when ic-random finds no
// cluster with at least k members.
SelectionResult select(const Eigen::Ref<const Matrix>& points,
                       const SelectionSpec& spec);

// Ablation entry point: reuse a prefit model so only the in-cluster pick
// varies. Selects one index per cluster (k = model.k). The pick=kClosest
// result equals select() with strategy kKMeansClosest when model came from
// fit(points, {k, seed}) with the same seed.
SelectionResult select_with_model(const Eigen::Ref<const Matrix>& points,
                                  const ClusterModel& model, InClusterPick pick,
                                  std::uint64_t seed);

// JSON document with the spec echo, indices, optional per-index ids (pass the
// matrix ids when present), and provenance records.
std::string encode_selection(const SelectionResult& result,
                             const std::vector<std::string>& ids = {});
SelectionResult decode_selection(const std::string& text,
                                 const std::string& context);
// Plain one-index-per-line form for piping into annotation tooling.
std::string encode_selection_lines(const SelectionResult& result);

void write_selection(const SelectionResult& result,
                     const std::filesystem::path& path,
                     const std::vector<std::string>& ids = {});
SelectionResult load_selection(const std::filesystem::path& path);

}  // namespace fsel
