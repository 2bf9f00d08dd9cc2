#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "fsel/embedding.hpp"
#include "fsel/eval.hpp"
#include "fsel/fileio.hpp"
#include "fsel/kmeans.hpp"
#include "fsel/parallel.hpp"
#include "fsel/rng.hpp"
#include "fsel/select.hpp"

namespace {

using fsel::Index;

std::string format_value(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

// Every command logs its fully resolved configuration (defaults included) to
// stderr, and file-producing commands with structured outputs embed the same
// object under a "config" key.
void log_config(const nlohmann::json& config) {
  std::fprintf(stderr, "config: %s\n", config.dump().c_str());
}

std::string with_config(const std::string& encoded,
                        const nlohmann::json& config) {
  auto doc = nlohmann::json::parse(encoded);
  doc["config"] = config;
  return doc.dump(2) + "\n";
}

void warn_large_budget(int k) {
  if (k > 100)
    std::fprintf(stderr,
                 "warning: k=%d is an unusually large annotation budget; "
                 "proceeding anyway\n",
                 k);
}

fsel::MatrixFormat parse_format(const std::string& name) {
  if (name == "binary") return fsel::MatrixFormat::kBinary;
  if (name == "text") return fsel::MatrixFormat::kText;
  throw std::invalid_argument("unknown format '" + name +
                              "' (expected binary, text)");
}

fsel::PoolingMode parse_pooling(const std::string& name) {
  if (name == "mean") return fsel::PoolingMode::kMean;
  if (name == "sum") return fsel::PoolingMode::kSum;
  throw std::invalid_argument("unknown pooling '" + name +
                              "' (expected mean, sum)");
}

fsel::EmbeddingMatrix load_input_matrix(const std::string& path) {
  return fsel::load_matrix(path, fsel::detect_matrix_format(path));
}

std::vector<std::string> read_lines(const std::string& path) {
  const std::string text = fsel::read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::size_t stop = end;
    if (stop > start && text[stop - 1] == '\r') --stop;
    lines.emplace_back(text, start, stop - start);
    start = end + 1;
  }
  return lines;
}

std::vector<fsel::Strategy> parse_strategy_list(const std::string& csv) {
  std::vector<fsel::Strategy> strategies;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    const std::string name = csv.substr(start, end - start);
    if (name.empty())
      throw std::invalid_argument("empty strategy name in list '" + csv + "'");
    strategies.push_back(fsel::parse_strategy(name));
    start = end + 1;
    if (end == csv.size()) break;
  }
  return strategies;
}

struct SynthArgs {
  std::int64_t n = 0;
  std::int64_t d = 0;
  int components = 0;
  double separation = 0.0;
  std::uint64_t seed = 0;
  std::string output;
  std::string labels;
  std::string format = "binary";
};

void run_synth(const SynthArgs& args) {
  const fsel::MatrixFormat format = parse_format(args.format);
  nlohmann::json config = {
      {"command", "synth"},         {"n", args.n},
      {"d", args.d},                {"components", args.components},
      {"separation", args.separation}, {"seed", args.seed},
      {"output", args.output},      {"labels", args.labels},
      {"format", args.format}};
  log_config(config);

  fsel::MixtureSpec spec;
  spec.n = static_cast<Index>(args.n);
  spec.d = static_cast<Index>(args.d);
  spec.components = args.components;
  spec.separation = args.separation;
  spec.seed = args.seed;
  const fsel::Mixture mixture = fsel::generate_mixture(spec);
  fsel::write_matrix(mixture.points, args.output, format);
  if (!args.labels.empty()) {
    std::string text;
    for (const int label : mixture.labels) {
      text += std::to_string(label);
      text += '\n';
    }
    fsel::write_file_atomic(args.labels, text);
  }
}

struct EmbedArgs {
  std::string texts;
  std::string vectors;
  std::string output;
  std::string pooling = "mean";
  std::string format = "binary";
  bool normalize = false;
};

void run_embed(const EmbedArgs& args) {
  const fsel::MatrixFormat format = parse_format(args.format);
  const fsel::PoolingMode pooling = parse_pooling(args.pooling);
  nlohmann::json config = {
      {"command", "embed"},     {"texts", args.texts},
      {"vectors", args.vectors}, {"output", args.output},
      {"pooling", args.pooling}, {"normalize", args.normalize},
      {"format", args.format}};
  log_config(config);

  const std::vector<std::string> instances = read_lines(args.texts);
  if (instances.empty())
    throw std::runtime_error(args.texts + ": no instances (file is empty)");
  const fsel::WordVectorTable table = fsel::load_word_vectors(args.vectors);
  fsel::EmbeddingMatrix m = fsel::embed_instances(instances, table, pooling);
  if (args.normalize) m = fsel::normalize_rows(m);
  fsel::write_matrix(m, args.output, format);
  std::fprintf(stderr, "embedded %lld instances into %lld dimensions\n",
               static_cast<long long>(m.rows()),
               static_cast<long long>(m.cols()));
}

struct ClusterArgs {
  std::string input;
  std::string output;
  int k = 0;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-6;
};

void run_cluster(const ClusterArgs& args) {
  warn_large_budget(args.k);
  nlohmann::json config = {{"command", "cluster"},
                           {"input", args.input},
                           {"output", args.output},
                           {"k", args.k},
                           {"seed", args.seed},
                           {"restarts", args.restarts},
                           {"max_iterations", args.max_iterations},
                           {"tolerance", args.tolerance}};
  log_config(config);

  const fsel::EmbeddingMatrix m = load_input_matrix(args.input);
  fsel::KMeansConfig kconfig;
  kconfig.k = args.k;
  kconfig.seed = args.seed;
  kconfig.n_restarts = args.restarts;
  kconfig.max_iterations = args.max_iterations;
  kconfig.rel_tolerance = args.tolerance;
  fsel::FitReport report;
  const fsel::ClusterModel model = fsel::fit(m.data, kconfig, &report);
  fsel::write_file_atomic(
      args.output, with_config(fsel::encode_model(model, &report), config));
  std::fprintf(stderr, "best restart %d of %d: sse=%s after %d iterations\n",
               report.best_restart, args.restarts,
               format_value(model.sse).c_str(), model.iterations);
}

struct SelectArgs {
  std::string input;
  std::string strategy;
  std::string model;
  std::string output;
  int k = 0;
  bool k_given = false;
  std::uint64_t seed = 0;
};

void run_select(const SelectArgs& args) {
  const fsel::Strategy strategy = fsel::parse_strategy(args.strategy);
  const bool kmeans_family = strategy == fsel::Strategy::kKMeansClosest ||
                             strategy == fsel::Strategy::kKMeansRandom ||
                             strategy == fsel::Strategy::kKMeansFarthest;
  if (!args.model.empty() && !kmeans_family)
    throw std::invalid_argument(
        "--model only applies to kmeans-* strategies (got " + args.strategy +
        ")");
  if (args.model.empty() && !args.k_given)
    throw std::invalid_argument("--k is required unless --model is given");

  const fsel::EmbeddingMatrix m = load_input_matrix(args.input);
  fsel::SelectionResult result;
  nlohmann::json config = {{"command", "select"}, {"input", args.input},
                           {"strategy", args.strategy}, {"seed", args.seed},
                           {"model", args.model},   {"output", args.output}};

  if (!args.model.empty()) {
    const fsel::ClusterModel model = fsel::load_model(args.model);
    if (args.k_given && args.k != model.k)
      throw std::invalid_argument(
          "--k=" + std::to_string(args.k) + " conflicts with model k=" +
          std::to_string(model.k));
    fsel::InClusterPick pick = fsel::InClusterPick::kClosest;
    if (strategy == fsel::Strategy::kKMeansRandom)
      pick = fsel::InClusterPick::kRandom;
    else if (strategy == fsel::Strategy::kKMeansFarthest)
      pick = fsel::InClusterPick::kFarthest;
    warn_large_budget(model.k);
    config["k"] = model.k;
    config["draw_seed"] = fsel::mix_seed(args.seed, fsel::kSelectionStream);
    log_config(config);
    result = fsel::select_with_model(m.data, model, pick, args.seed);
  } else {
    warn_large_budget(args.k);
    config["k"] = args.k;
    config["draw_seed"] = fsel::mix_seed(args.seed, fsel::kSelectionStream);
    log_config(config);
    fsel::SelectionSpec spec;
    spec.strategy = strategy;
    spec.k = args.k;
    spec.seed = args.seed;
    result = fsel::select(m.data, spec);
  }

  if (!args.output.empty())
    fsel::write_file_atomic(
        args.output,
        with_config(fsel::encode_selection(result, m.ids), config));
  std::fputs(fsel::encode_selection_lines(result).c_str(), stdout);
}

struct EvaluateArgs {
  std::string input;
  std::string selection;
  std::string metric = "facility-location";
};

void run_evaluate(const EvaluateArgs& args) {
  const fsel::Metric metric = fsel::parse_metric(args.metric);
  nlohmann::json config = {{"command", "evaluate"},
                           {"input", args.input},
                           {"selection", args.selection},
                           {"metric", args.metric}};
  log_config(config);

  const fsel::EmbeddingMatrix m = load_input_matrix(args.input);
  const fsel::SelectionResult selection = fsel::load_selection(args.selection);
  const double value = fsel::score(metric, m.data, selection.indices);
  std::fprintf(stdout, "%s\n", format_value(value).c_str());
}

struct CompareArgs {
  std::string input;
  std::string strategies;
  std::string metric = "facility-location";
  std::string output;
  int k = 0;
  int trials = 10;
  std::uint64_t seed = 0;
};

void run_compare(const CompareArgs& args) {
  const std::vector<fsel::Strategy> strategies =
      parse_strategy_list(args.strategies);
  const fsel::Metric metric = fsel::parse_metric(args.metric);
  warn_large_budget(args.k);
  nlohmann::json config = {{"command", "compare"},
                           {"input", args.input},
                           {"strategies", args.strategies},
                           {"k", args.k},
                           {"trials", args.trials},
                           {"seed", args.seed},
                           {"metric", args.metric},
                           {"output", args.output}};
  log_config(config);

  const fsel::EmbeddingMatrix m = load_input_matrix(args.input);
  const std::vector<fsel::TrialReport> reports = fsel::compare_strategies(
      m.data, strategies, args.k, args.trials, args.seed, metric);
  const std::string csv = "# " + config.dump() + "\n" + fsel::to_csv(reports);
  if (!args.output.empty()) {
    fsel::write_file_atomic(args.output, csv);
    std::fputs(fsel::format_reports(reports).c_str(), stdout);
  } else {
    std::fputs(csv.c_str(), stdout);
    std::fputs(fsel::format_reports(reports).c_str(), stderr);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fsel — budget-constrained selection of representative instances from "
      "an embedding collection"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker thread cap; 0 means use all hardware threads "
                 "(results never depend on this)")
      ->capture_default_str();

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic Gaussian-mixture embedding matrix");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--n", synth.n, "Number of points")->required();
  synth_cmd->add_option("--d", synth.d, "Dimension")->required();
  synth_cmd->add_option("--components", synth.components,
                        "Mixture component count")
      ->required();
  synth_cmd
      ->add_option("--separation", synth.separation,
                   "Minimum center distance in units of component std")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")
      ->capture_default_str();
  synth_cmd->add_option("--output", synth.output, "Matrix output path")
      ->required();
  synth_cmd->add_option("--labels", synth.labels,
                        "Optional path for ground-truth component labels");
  synth_cmd->add_option("--format", synth.format, "Output format: binary, text")
      ->capture_default_str();

  EmbedArgs embed;
  CLI::App* embed_cmd = app.add_subcommand(
      "embed", "Pool word vectors into instance embeddings");
  embed_cmd->fallthrough();
  embed_cmd
      ->add_option("--texts", embed.texts, "Text file, one instance per line")
      ->required();
  embed_cmd->add_option("--vectors", embed.vectors, "Word-vector table")
      ->required();
  embed_cmd->add_option("--output", embed.output, "Matrix output path")
      ->required();
  embed_cmd->add_option("--pooling", embed.pooling, "Pooling: mean, sum")
      ->capture_default_str();
  embed_cmd->add_flag("--normalize", embed.normalize,
                      "Scale each embedding to unit norm");
  embed_cmd->add_option("--format", embed.format, "Output format: binary, text")
      ->capture_default_str();

  ClusterArgs cluster;
  CLI::App* cluster_cmd =
      app.add_subcommand("cluster", "Fit a k-means model to a matrix");
  cluster_cmd->fallthrough();
  cluster_cmd->add_option("--input", cluster.input, "Matrix path")->required();
  cluster_cmd->add_option("--k", cluster.k, "Cluster count")->required();
  cluster_cmd->add_option("--seed", cluster.seed, "Fit seed")
      ->capture_default_str();
  cluster_cmd->add_option("--restarts", cluster.restarts, "Restart count")
      ->capture_default_str();
  cluster_cmd
      ->add_option("--max-iterations", cluster.max_iterations,
                   "Lloyd iteration cap")
      ->capture_default_str();
  cluster_cmd
      ->add_option("--tolerance", cluster.tolerance,
                   "Relative SSE improvement threshold")
      ->capture_default_str();
  cluster_cmd->add_option("--output", cluster.output, "Model output path")
      ->required();

  SelectArgs select;
  CLI::App* select_cmd = app.add_subcommand(
      "select", "Select k instances; prints one index per line");
  select_cmd->fallthrough();
  select_cmd->add_option("--input", select.input, "Matrix path")->required();
  select_cmd
      ->add_option("--strategy", select.strategy,
                   "random, ic-random, kmeans-closest, kmeans-random, "
                   "kmeans-farthest")
      ->required();
  CLI::Option* k_opt =
      select_cmd->add_option("--k", select.k, "Selection budget");
  select_cmd->add_option("--seed", select.seed, "Selection seed")
      ->capture_default_str();
  select_cmd->add_option("--model", select.model,
                         "Reuse a prefit model (kmeans-* strategies only)");
  select_cmd->add_option("--output", select.output,
                         "Optional structured result path");

  EvaluateArgs evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "Score a stored selection against its matrix");
  evaluate_cmd->fallthrough();
  evaluate_cmd->add_option("--input", evaluate.input, "Matrix path")
      ->required();
  evaluate_cmd->add_option("--selection", evaluate.selection, "Selection path")
      ->required();
  evaluate_cmd
      ->add_option("--metric", evaluate.metric,
                   "facility-location, coverage-radius, diversity")
      ->capture_default_str();

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Run the multi-trial strategy comparison; emits CSV");
  compare_cmd->fallthrough();
  compare_cmd->add_option("--input", compare.input, "Matrix path")->required();
  compare_cmd
      ->add_option("--strategies", compare.strategies,
                   "Comma-separated strategy names")
      ->required();
  compare_cmd->add_option("--k", compare.k, "Selection budget")->required();
  compare_cmd->add_option("--trials", compare.trials, "Trial count")
      ->capture_default_str();
  compare_cmd->add_option("--seed", compare.seed, "Base seed")
      ->capture_default_str();
  compare_cmd
      ->add_option("--metric", compare.metric,
                   "facility-location, coverage-radius, diversity")
      ->capture_default_str();
  compare_cmd->add_option("--output", compare.output,
                          "CSV output path (defaults to stdout)");

  synth_cmd->callback([&] {
    fsel::set_max_threads(threads);
    run_synth(synth);
  });
  embed_cmd->callback([&] {
    fsel::set_max_threads(threads);
    run_embed(embed);
  });
  cluster_cmd->callback([&] {
    fsel::set_max_threads(threads);
    run_cluster(cluster);
  });
  select_cmd->callback([&] {
    fsel::set_max_threads(threads);
    select.k_given = k_opt->count() > 0;
    run_select(select);
  });
  evaluate_cmd->callback([&] {
    fsel::set_max_threads(threads);
    run_evaluate(evaluate);
  });
  compare_cmd->callback([&] {
    fsel::set_max_threads(threads);
    run_compare(compare);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fsel: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
