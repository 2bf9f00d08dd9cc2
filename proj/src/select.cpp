#include "fsel/select.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fsel/distance.hpp"
#include "fsel/fileio.hpp"
#include "fsel/rng.hpp"

namespace fsel {

namespace {

struct StrategyName {
  Strategy strategy;
  const char* name;
};

constexpr StrategyName kStrategyNames[] = {
    {Strategy::kRandom, "random"},
    {Strategy::kInClusterRandom, "ic-random"},
    {Strategy::kKMeansClosest, "kmeans-closest"},
    {Strategy::kKMeansRandom, "kmeans-random"},
    {Strategy::kKMeansFarthest, "kmeans-farthest"},
};

void check_spec(const Eigen::Ref<const Matrix>& points,
                const SelectionSpec& spec) {
  if (points.rows() < 1 || points.cols() < 1)
    throw std::invalid_argument("select: empty point matrix");
  if (spec.k < 1)
    throw std::invalid_argument("select: k must be at least 1");
  if (static_cast<Index>(spec.k) > points.rows())
    throw std::invalid_argument("select: k=" + std::to_string(spec.k) +
                                " exceeds n=" + std::to_string(points.rows()));
}

// First k entries of a Fisher-Yates shuffle over [0, n), then sorted so the
// reported order carries no meaning beyond the selected set.
std::vector<Index> sample_without_replacement(Index n, int k, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const std::uint64_t offset =
        rng.next_index(static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(i) + offset]);
  }
  std::vector<Index> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<Index>> cluster_members(const ClusterModel& model) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(model.k));
  for (std::size_t i = 0; i < model.assignment.size(); ++i)
    members[static_cast<std::size_t>(model.assignment[i])].push_back(
        static_cast<Index>(i));
  return members;
}

// One pick per cluster in ascending cluster order; distance ties go to the
// lowest instance index (members are ascending, strict comparisons keep the
// first optimum seen).
SelectionResult pick_per_cluster(const Eigen::Ref<const Matrix>& points,
                                 const ClusterModel& model, InClusterPick pick,
                                 Rng& rng) {
  const auto members = cluster_members(model);
  SelectionResult result;
  result.indices.reserve(static_cast<std::size_t>(model.k));
  result.provenance.reserve(static_cast<std::size_t>(model.k));
  for (int j = 0; j < model.k; ++j) {
    const auto& group = members[static_cast<std::size_t>(j)];
    Index chosen = -1;
    double chosen_sq = 0.0;
    switch (pick) {
      case InClusterPick::kClosest:
      case InClusterPick::kFarthest: {
        const bool want_min = pick == InClusterPick::kClosest;
        for (const Index i : group) {
          const double sq =
              squared_distance(points.row(i), model.centroids.row(j));
          if (chosen < 0 || (want_min ? sq < chosen_sq : sq > chosen_sq)) {
            chosen = i;
            chosen_sq = sq;
          }
        }
        break;
      }
      case InClusterPick::kRandom: {
        chosen = group[static_cast<std::size_t>(
            rng.next_index(static_cast<std::uint64_t>(group.size())))];
        chosen_sq =
            squared_distance(points.row(chosen), model.centroids.row(j));
        break;
      }
    }
    result.indices.push_back(chosen);
    result.provenance.push_back({j, std::sqrt(chosen_sq)});
  }
  return result;
}

Strategy strategy_for(InClusterPick pick) {
  switch (pick) {
    case InClusterPick::kClosest:
      return Strategy::kKMeansClosest;
    case InClusterPick::kRandom:
      return Strategy::kKMeansRandom;
    case InClusterPick::kFarthest:
      return Strategy::kKMeansFarthest;
  }
  throw std::logic_error("unreachable");
}

InClusterPick pick_for(Strategy strategy) {
  switch (strategy) {
    case Strategy::kKMeansClosest:
      return InClusterPick::kClosest;
    case Strategy::kKMeansRandom:
      return InClusterPick::kRandom;
    case Strategy::kKMeansFarthest:
      return InClusterPick::kFarthest;
    default:
      throw std::logic_error("unreachable");
  }
}

}  // namespace

std::string strategy_name(Strategy strategy) {
  for (const auto& entry : kStrategyNames)
    if (entry.strategy == strategy) return entry.name;
  throw std::logic_error("unknown strategy value");
}

Strategy parse_strategy(const std::string& name) {
  for (const auto& entry : kStrategyNames)
    if (name == entry.name) return entry.strategy;
  std::string known;
  for (const auto& entry : kStrategyNames) {
    if (!known.empty()) known += ", ";
    known += entry.name;
  }
  throw std::invalid_argument("unknown strategy '" + name + "' (expected " +
                              known + ")");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> kAll = {
      Strategy::kRandom, Strategy::kInClusterRandom, Strategy::kKMeansClosest,
      Strategy::kKMeansRandom, Strategy::kKMeansFarthest};
  return kAll;
}

void validate(const SelectionResult& result) {
  const int k = result.spec.k;
  if (k < 1) throw std::invalid_argument("selection: k must be at least 1");
  if (result.indices.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument(
        "selection: expected " + std::to_string(k) + " indices, found " +
        std::to_string(result.indices.size()));
  std::vector<Index> sorted = result.indices;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0)
    throw std::invalid_argument("selection: negative index");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("selection: duplicate index");
  if (!result.provenance.empty() &&
      result.provenance.size() != result.indices.size())
    throw std::invalid_argument(
        "selection: provenance length does not match indices");
}

SelectionResult select(const Eigen::Ref<const Matrix>& points,
                       const SelectionSpec& spec) {
  check_spec(points, spec);
  const Index n = points.rows();
  Rng rng(mix_seed(spec.seed, kSelectionStream));

  SelectionResult result;
  switch (spec.strategy) {
    case Strategy::kRandom: {
      result.indices = sample_without_replacement(n, spec.k, rng);
      break;
    }
    case Strategy::kInClusterRandom: {
      KMeansConfig config;
      config.k = spec.k;
      config.seed = spec.seed;
      const ClusterModel model = fit(points, config);
      const auto members = cluster_members(model);

      // Eligible clusters must be able to supply the whole budget; among
      // them the choice is uniform. When none qualifies even the largest
      // cluster falls short, so the run cannot proceed.
      std::vector<int> eligible;
      std::size_t largest = 0;
      for (int j = 0; j < model.k; ++j) {
        const std::size_t size = members[static_cast<std::size_t>(j)].size();
        largest = std::max(largest, size);
        if (size >= static_cast<std::size_t>(spec.k)) eligible.push_back(j);
      }
      if (eligible.empty())
        throw std::runtime_error(
            "ic-random: no cluster can supply k=" + std::to_string(spec.k) +
            " points (largest cluster has " + std::to_string(largest) +
            " members)");
      const int cluster = eligible[static_cast<std::size_t>(
          rng.next_index(static_cast<std::uint64_t>(eligible.size())))];

      const auto& group = members[static_cast<std::size_t>(cluster)];
      const auto picks = sample_without_replacement(
          static_cast<Index>(group.size()), spec.k, rng);
      for (const Index p : picks) {
        const Index i = group[static_cast<std::size_t>(p)];
        result.indices.push_back(i);
        result.provenance.push_back(
            {cluster, std::sqrt(squared_distance(
                          points.row(i), model.centroids.row(cluster)))});
      }
      break;
    }
    case Strategy::kKMeansClosest:
    case Strategy::kKMeansRandom:
    case Strategy::kKMeansFarthest: {
      KMeansConfig config;
      config.k = spec.k;
      config.seed = spec.seed;
      const ClusterModel model = fit(points, config);
      result = pick_per_cluster(points, model, pick_for(spec.strategy), rng);
      break;
    }
  }
  result.spec = spec;
  validate(result);
  return result;
}

SelectionResult select_with_model(const Eigen::Ref<const Matrix>& points,
                                  const ClusterModel& model, InClusterPick pick,
                                  std::uint64_t seed) {
  validate(model);
  if (static_cast<Index>(model.assignment.size()) != points.rows())
    throw std::invalid_argument(
        "select_with_model: model covers " +
        std::to_string(model.assignment.size()) + " points, matrix has " +
        std::to_string(points.rows()));
  if (model.centroids.cols() != points.cols())
    throw std::invalid_argument(
        "select_with_model: model dimension " +
        std::to_string(model.centroids.cols()) + " does not match matrix " +
        std::to_string(points.cols()));

  Rng rng(mix_seed(seed, kSelectionStream));
  SelectionResult result = pick_per_cluster(points, model, pick, rng);
  result.spec.strategy = strategy_for(pick);
  result.spec.k = model.k;
  result.spec.seed = seed;
  validate(result);
  return result;
}

std::string encode_selection(const SelectionResult& result,
                             const std::vector<std::string>& ids) {
  nlohmann::json doc;
  doc["format"] = "fsel.selection";
  doc["version"] = kFormatVersion;
  doc["spec"] = {{"strategy", strategy_name(result.spec.strategy)},
                 {"k", result.spec.k},
                 {"seed", result.spec.seed}};
  auto indices = nlohmann::json::array();
  for (const Index i : result.indices) indices.push_back(i);
  doc["indices"] = std::move(indices);
  if (!ids.empty()) {
    auto names = nlohmann::json::array();
    for (const Index i : result.indices)
      names.push_back(ids.at(static_cast<std::size_t>(i)));
    doc["ids"] = std::move(names);
  }
  if (!result.provenance.empty()) {
    auto provenance = nlohmann::json::array();
    for (std::size_t p = 0; p < result.provenance.size(); ++p)
      provenance.push_back({{"index", result.indices[p]},
                            {"cluster", result.provenance[p].cluster},
                            {"distance", result.provenance[p].distance}});
    doc["provenance"] = std::move(provenance);
  }
  return doc.dump(2) + "\n";
}

SelectionResult decode_selection(const std::string& text,
                                 const std::string& context) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "fsel.selection")
      throw std::runtime_error("not a selection document");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw std::runtime_error("unsupported version");
    SelectionResult result;
    const auto& spec = doc.at("spec");
    result.spec.strategy = parse_strategy(spec.at("strategy").get<std::string>());
    result.spec.k = spec.at("k").get<int>();
    result.spec.seed = spec.at("seed").get<std::uint64_t>();
    for (const auto& value : doc.at("indices"))
      result.indices.push_back(value.get<Index>());
    if (doc.contains("provenance")) {
      for (const auto& entry : doc.at("provenance"))
        result.provenance.push_back({entry.at("cluster").get<int>(),
                                     entry.at("distance").get<double>()});
      if (result.provenance.size() != result.indices.size())
        throw std::runtime_error("provenance length does not match indices");
    }
    validate(result);
    return result;
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": invalid selection: " + e.what());
  }
}

std::string encode_selection_lines(const SelectionResult& result) {
  std::string out;
  for (const Index i : result.indices) {
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

void write_selection(const SelectionResult& result,
                     const std::filesystem::path& path,
                     const std::vector<std::string>& ids) {
  validate(result);
  write_file_atomic(path, encode_selection(result, ids));
}

SelectionResult load_selection(const std::filesystem::path& path) {
  return decode_selection(read_file(path), path.string());
}

}  // namespace fsel
