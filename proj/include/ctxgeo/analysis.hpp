#pragma once

// Per-layer contextuality analysis of a dump: anisotropy baselines, mean
// self-similarity, intra-sentence similarity and MEV (raw and adjusted), and
// the highest/lowest self-similarity words.

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ctxgeo/embedding_store.hpp"
#include "ctxgeo/metrics.hpp"

namespace ctxgeo {

struct AnalyzeOptions {
  std::size_t min_contexts = 5;
  std::size_t samples = 1000;    // baseline sample size
  std::size_t sentences = 500;   // sentences sampled for intra-sentence similarity
  std::optional<std::size_t> word_sample = 1000;  // nullopt: every eligible word
  std::size_t cap = 1000;        // occurrences per word
  std::uint64_t seed = 0;
  bool lowercase = false;
  std::size_t top_words = 20;
};

struct LayerReport {
  std::size_t layer = 0;
  BaselineEstimate cosine_baseline;
  BaselineEstimate mev_baseline;
  double mean_selfsim_raw = 0.0;
  double mean_selfsim_adjusted = 0.0;
  double mean_intrasim_raw = 0.0;
  double mean_intrasim_adjusted = 0.0;
  double mean_mev_raw = 0.0;
  double mean_mev_adjusted = 0.0;
  std::size_t n_words = 0;
  std::size_t n_sentences = 0;
  std::uint64_t seed = 0;
  std::size_t min_contexts = 0;
  std::size_t cap = 0;
};

struct WordLayerStats {
  double selfsim_raw = 0.0;
  double selfsim_adjusted = 0.0;
  double mev_raw = 0.0;
  double mev_adjusted = 0.0;
};

struct WordReport {
  std::string word;
  std::vector<WordLayerStats> layers;
  std::size_t occurrences = 0;
  std::size_t unique_contexts = 0;
  double mean_selfsim_adjusted = 0.0;  // over layers, used for ranking
};

struct AnalysisReport {
  std::string model_name;
  AnalyzeOptions options;
  std::size_t n_tokens = 0;
  std::size_t n_sentences_total = 0;
  std::size_t n_word_types = 0;
  std::size_t n_eligible_words = 0;
  std::size_t n_words_skipped = 0;
  std::vector<LayerReport> layers;
  std::vector<WordReport> top_words;     // highest mean adjusted self-similarity first
  std::vector<WordReport> bottom_words;  // lowest first
};

/// Deterministic for fixed options: the word and sentence samples are drawn
/// once (shared by all layers), baselines use generators derived from
/// (seed, layer), and all aggregation runs in sorted word / sentence order.
/// Throws InsufficientDataError when no word is eligible.
AnalysisReport analyze(const EmbeddingDump& dump, const AnalyzeOptions& options = {});

nlohmann::json to_json(const AnalysisReport& report);

/// Columns layer,metric,raw,baseline,adjusted; metrics selfsim, intrasim, mev,
/// cosine_baseline and mev_baseline (the last two with baseline 0).
std::string to_csv(const AnalysisReport& report);

}  // namespace ctxgeo
