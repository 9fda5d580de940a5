// ctxgeo: command-line front end.
//
//   ctxgeo synth    --kind K --out DIR [spec flags]
//   ctxgeo analyze  --dump DIR --out report.json [--csv series.csv] [sampling flags]
//   ctxgeo distill  --dump DIR --layer L --out vectors.txt
//   ctxgeo bench    --vectors vectors.txt --task T --data FILE --out result.json
//
// Exit codes: 0 ok, 1 usage, 2 format/parse, 3 insufficient data/coverage, 4 I/O.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ctxgeo/analysis.hpp"
#include "ctxgeo/benchmarks.hpp"
#include "ctxgeo/distill.hpp"
#include "ctxgeo/embedding_store.hpp"
#include "ctxgeo/errors.hpp"
#include "ctxgeo/synth.hpp"

namespace fs = std::filesystem;
using namespace ctxgeo;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path, "write failed");
}

struct SynthArgs {
  std::string kind;
  std::string out;
  SynthSpec spec;
};

struct AnalyzeArgs {
  std::string dump;
  std::string out;
  std::string csv;
  std::string word_sample = "1000";
  AnalyzeOptions options;
};

struct DistillArgs {
  std::string dump;
  std::string out;
  std::size_t layer = 0;
  std::size_t min_contexts = 5;
  std::size_t cap = 1000;
  std::uint64_t seed = 0;
  bool lowercase = false;
};

struct BenchArgs {
  std::string vectors;
  std::string task;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
};

int run_synth(const SynthArgs& args) {
  SynthSpec spec = args.spec;
  auto kind = parse_synth_kind(args.kind);
  if (!kind) throw ContractError("unknown --kind '" + args.kind + "'");
  spec.kind = *kind;
  auto dump = generate(spec);
  write_dump(dump, args.out);
  std::cout << "wrote " << dump.meta.token_count() << " tokens x " << dump.meta.layer_count()
            << " layers to " << args.out << '\n';
  return 0;
}

int run_analyze(AnalyzeArgs args) {
  if (args.word_sample == "all") {
    args.options.word_sample.reset();
  } else {
    try {
      std::size_t pos = 0;
      args.options.word_sample = std::stoull(args.word_sample, &pos);
      if (pos != args.word_sample.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ContractError("--word-sample must be a positive integer or 'all'");
    }
  }
  const auto dump = load_dump(args.dump);
  const auto report = analyze(dump, args.options);
  write_text(args.out, to_json(report).dump(2) + "\n");
  if (!args.csv.empty()) write_text(args.csv, to_csv(report));
  return 0;
}

int run_distill(const DistillArgs& args) {
  const auto dump = load_dump(args.dump);
  const auto index = build_index(dump.meta, args.min_contexts, args.lowercase);
  const auto result = distill(index, dump.vectors, args.layer, args.cap, args.seed);
  write_table(result.table, fs::path(args.out));
  for (const auto& w : result.ambiguous_words) {
    std::cerr << "warning: first principal component of '" << w << "' is not unique\n";
  }
  if (result.skipped_words > 0) {
    std::cerr << "note: skipped " << result.skipped_words << " words with fewer than 2 occurrences\n";
  }
  return 0;
}

int run_bench(const BenchArgs& args) {
  const auto table = read_table(fs::path(args.vectors));
  BenchResult result;
  if (args.task == "similarity") {
    result = eval_similarity(load_similarity_tsv(fs::path(args.data)), table);
  } else if (args.task == "analogy") {
    result = eval_analogy(load_analogy_txt(fs::path(args.data)), table);
  } else if (args.task == "categorization") {
    result = eval_categorization(load_categorization_tsv(fs::path(args.data)), table,
                                 args.restarts, args.seed);
  } else {
    throw ContractError("unknown --task '" + args.task + "'");
  }
  result.seed = args.seed;
  const auto row = to_json(result).dump();
  write_text(args.out, row + "\n");
  std::cout << row << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextuality and anisotropy measurements for contextual word representations"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic embedding dump");
  synth->add_option("--kind", synth_args.kind, "isotropic | cone | static | toy_contextual")->required();
  synth->add_option("--out", synth_args.out, "Output dump directory")->required();
  synth->add_option("--d", synth_args.spec.d, "Vector dimension")->capture_default_str();
  synth->add_option("--sentences", synth_args.spec.sentences)->capture_default_str();
  synth->add_option("--sentence-length", synth_args.spec.sentence_length)->capture_default_str();
  synth->add_option("--vocab", synth_args.spec.vocab)->capture_default_str();
  synth->add_option("--layers", synth_args.spec.layers, "Layer count (not toy_contextual)")
      ->capture_default_str();
  synth->add_option("--mean-scale", synth_args.spec.mean_scale, "Shared mean norm (cone)")
      ->capture_default_str();
  synth->add_option("--mixing", synth_args.spec.mixing, "toy_contextual lambdas, lambda_0 = 0")
      ->delimiter(',');
  synth->add_option("--zipf", synth_args.spec.zipf_exponent, "Zipf exponent of token draws")
      ->capture_default_str();
  synth->add_option("--seed", synth_args.spec.seed)->capture_default_str();

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-layer anisotropy and contextuality report");
  analyze_cmd->add_option("--dump", analyze_args.dump)->required();
  analyze_cmd->add_option("--out", analyze_args.out, "JSON report path")->required();
  analyze_cmd->add_option("--csv", analyze_args.csv, "Plot series (layer,metric,raw,baseline,adjusted)");
  analyze_cmd->add_option("--min-contexts", analyze_args.options.min_contexts)->capture_default_str();
  analyze_cmd->add_option("--samples", analyze_args.options.samples, "Baseline sample size")
      ->capture_default_str();
  analyze_cmd->add_option("--sentences", analyze_args.options.sentences,
                          "Sentences sampled for intra-sentence similarity")
      ->capture_default_str();
  analyze_cmd->add_option("--word-sample", analyze_args.word_sample, "Words sampled, or 'all'")
      ->capture_default_str();
  analyze_cmd->add_option("--cap", analyze_args.options.cap, "Occurrences per word")
      ->capture_default_str();
  analyze_cmd->add_option("--seed", analyze_args.options.seed)->capture_default_str();
  analyze_cmd->add_option("--top", analyze_args.options.top_words, "Words in each ranking table")
      ->capture_default_str();
  analyze_cmd->add_flag("--lowercase", analyze_args.options.lowercase, "ASCII case fold tokens");

  DistillArgs distill_args;
  auto* distill_cmd = app.add_subcommand("distill", "First-PC static embeddings for one layer");
  distill_cmd->add_option("--dump", distill_args.dump)->required();
  distill_cmd->add_option("--layer", distill_args.layer)->required();
  distill_cmd->add_option("--out", distill_args.out)->required();
  distill_cmd->add_option("--min-contexts", distill_args.min_contexts)->capture_default_str();
  distill_cmd->add_option("--cap", distill_args.cap)->capture_default_str();
  distill_cmd->add_option("--seed", distill_args.seed)->capture_default_str();
  distill_cmd->add_flag("--lowercase", distill_args.lowercase);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Evaluate static vectors on a benchmark file");
  bench->add_option("--vectors", bench_args.vectors)->required();
  bench->add_option("--task", bench_args.task)
      ->required()
      ->check(CLI::IsMember({"similarity", "analogy", "categorization"}));
  bench->add_option("--data", bench_args.data)->required();
  bench->add_option("--out", bench_args.out)->required();
  bench->add_option("--seed", bench_args.seed)->capture_default_str();
  bench->add_option("--restarts", bench_args.restarts, "k-means restarts (categorization)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::usage);
  }

  try {
    if (*synth) return run_synth(synth_args);
    if (*analyze_cmd) return run_analyze(analyze_args);
    if (*distill_cmd) return run_distill(distill_args);
    if (*bench) return run_bench(bench_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::usage);
  }
  return static_cast<int>(ErrorCategory::usage);
}
