#include "ctxgeo/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "ctxgeo/errors.hpp"
#include "ctxgeo/seeding.hpp"

namespace ctxgeo {

namespace {

std::vector<std::string> choose_words(const WordIndex& index, const AnalyzeOptions& options,
                                      std::size_t& skipped) {
  std::vector<std::string> usable;
  for (auto& w : index.eligible_words()) {
    // min_contexts = 1 admits words seen once; no pairwise measure exists for them.
    if (index.occurrences(w).size() < 2) {
      ++skipped;
      continue;
    }
    usable.push_back(std::move(w));
  }
  if (!options.word_sample || *options.word_sample >= usable.size()) return usable;
  std::vector<std::string> chosen;
  chosen.reserve(*options.word_sample);
  auto engine = derive_engine(options.seed, Stream::word_sample);
  std::sample(usable.begin(), usable.end(), std::back_inserter(chosen), *options.word_sample,
              engine);
  return chosen;
}

std::vector<std::size_t> choose_sentences(const WordIndex& index, const AnalyzeOptions& options) {
  std::vector<std::size_t> all(index.sentence_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (options.sentences >= all.size()) return all;
  std::vector<std::size_t> chosen;
  chosen.reserve(options.sentences);
  auto engine = derive_engine(options.seed, Stream::sentence_sample);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), options.sentences, engine);
  return chosen;
}

std::string number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

}  // namespace

AnalysisReport analyze(const EmbeddingDump& dump, const AnalyzeOptions& options) {
  if (options.samples < 2) throw ContractError("--samples must be >= 2");
  if (options.sentences < 1) throw ContractError("--sentences must be >= 1");
  if (options.cap < 2) throw ContractError("--cap must be >= 2");
  if (options.word_sample && *options.word_sample < 1) {
    throw ContractError("--word-sample must be >= 1 or 'all'");
  }

  const auto index = build_index(dump.meta, options.min_contexts, options.lowercase);
  const auto& vectors = dump.vectors;

  AnalysisReport report;
  report.model_name = dump.meta.model_name;
  report.options = options;
  report.n_tokens = index.total_occurrences();
  report.n_sentences_total = index.sentence_count();
  report.n_word_types = index.words().size();

  const auto words = choose_words(index, options, report.n_words_skipped);
  report.n_eligible_words = index.eligible_words().size();
  if (words.empty()) {
    throw InsufficientDataError("no eligible words: no word type occurs in at least " +
                                std::to_string(options.min_contexts) + " distinct sentences");
  }
  const auto sentences = choose_sentences(index, options);

  std::vector<WordReport> word_reports(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    word_reports[i].word = words[i];
    word_reports[i].occurrences = index.occurrences(words[i]).size();
    word_reports[i].unique_contexts = index.unique_context_count(words[i]);
  }

  for (std::size_t layer = 0; layer < dump.meta.layer_count(); ++layer) {
    LayerReport lr;
    lr.layer = layer;
    lr.seed = options.seed;
    lr.min_contexts = options.min_contexts;
    lr.cap = options.cap;
    lr.cosine_baseline = cosine_baseline(vectors, index, layer, options.samples, options.seed);
    lr.mev_baseline = mev_baseline(vectors, index, layer, options.samples, options.seed);

    double selfsim_total = 0.0;
    double mev_total = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto m = occurrence_matrix(words[i], layer, index, vectors, options.cap, options.seed);
      WordLayerStats stats;
      stats.selfsim_raw = self_similarity(m);
      stats.mev_raw = mev(m).mev;
      stats.selfsim_adjusted =
          adjust(stats.selfsim_raw, MeasureKind::self_similarity, lr.cosine_baseline).adjusted;
      stats.mev_adjusted = adjust(stats.mev_raw, MeasureKind::mev, lr.mev_baseline).adjusted;
      word_reports[i].layers.push_back(stats);
      selfsim_total += stats.selfsim_raw;
      mev_total += stats.mev_raw;
    }
    lr.n_words = words.size();
    lr.mean_selfsim_raw = selfsim_total / static_cast<double>(words.size());
    lr.mean_mev_raw = mev_total / static_cast<double>(words.size());

    double intrasim_total = 0.0;
    const auto d = static_cast<Eigen::Index>(vectors.dim(layer));
    for (auto sid : sentences) {
      const auto offset = index.sentence_offset(sid);
      const auto len = index.sentence_length(sid);
      Eigen::MatrixXd tokens(d, static_cast<Eigen::Index>(len));
      for (std::size_t t = 0; t < len; ++t) {
        tokens.col(static_cast<Eigen::Index>(t)) = vectors.vector(layer, offset + t);
      }
      intrasim_total += intra_sentence_similarity(tokens);
    }
    lr.n_sentences = sentences.size();
    lr.mean_intrasim_raw = intrasim_total / static_cast<double>(sentences.size());

    lr.mean_selfsim_adjusted =
        adjust(lr.mean_selfsim_raw, MeasureKind::self_similarity, lr.cosine_baseline).adjusted;
    lr.mean_intrasim_adjusted =
        adjust(lr.mean_intrasim_raw, MeasureKind::intra_sentence_similarity, lr.cosine_baseline)
            .adjusted;
    lr.mean_mev_adjusted = adjust(lr.mean_mev_raw, MeasureKind::mev, lr.mev_baseline).adjusted;
    report.layers.push_back(lr);
    vectors.release(layer);
  }

  for (auto& wr : word_reports) {
    double total = 0.0;
    for (const auto& s : wr.layers) total += s.selfsim_adjusted;
    wr.mean_selfsim_adjusted = total / static_cast<double>(wr.layers.size());
  }
  auto ranked = word_reports;
  std::sort(ranked.begin(), ranked.end(), [](const WordReport& a, const WordReport& b) {
    if (a.mean_selfsim_adjusted != b.mean_selfsim_adjusted) {
      return a.mean_selfsim_adjusted > b.mean_selfsim_adjusted;
    }
    return a.word < b.word;
  });
  const std::size_t k = std::min(options.top_words, ranked.size());
  report.top_words.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  report.bottom_words.assign(ranked.rbegin(), ranked.rbegin() + static_cast<std::ptrdiff_t>(k));
  return report;
}

nlohmann::json to_json(const AnalysisReport& report) {
  using nlohmann::json;
  const auto& o = report.options;
  json params = {{"min_contexts", o.min_contexts},
                 {"samples", o.samples},
                 {"sentences", o.sentences},
                 {"cap", o.cap},
                 {"seed", o.seed},
                 {"lowercase", o.lowercase},
                 {"context_rule", "distinct sentence ids"},
                 {"baseline_pair_rule", kBaselinePairRule},
                 {"mev_convention", "uncentered occurrence matrix"}};
  if (o.word_sample) {
    params["word_sample"] = *o.word_sample;
  } else {
    params["word_sample"] = "all";
  }

  json layers = json::array();
  for (const auto& l : report.layers) {
    layers.push_back({{"layer", l.layer},
                      {"cosine_baseline", l.cosine_baseline.value},
                      {"cosine_baseline_samples", l.cosine_baseline.sample_size},
                      {"mev_baseline", l.mev_baseline.value},
                      {"mev_baseline_samples", l.mev_baseline.sample_size},
                      {"mean_selfsim_raw", l.mean_selfsim_raw},
                      {"mean_selfsim_adjusted", l.mean_selfsim_adjusted},
                      {"mean_intrasim_raw", l.mean_intrasim_raw},
                      {"mean_intrasim_adjusted", l.mean_intrasim_adjusted},
                      {"mean_mev_raw", l.mean_mev_raw},
                      {"mean_mev_adjusted", l.mean_mev_adjusted},
                      {"n_words", l.n_words},
                      {"n_sentences", l.n_sentences},
                      {"seed", l.seed},
                      {"min_contexts", l.min_contexts},
                      {"cap", l.cap}});
  }

  auto words_json = [](const std::vector<WordReport>& words) {
    json out = json::array();
    for (const auto& w : words) {
      json per_layer = json::array();
      for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& s = w.layers[l];
        per_layer.push_back({{"layer", l},
                             {"selfsim_raw", s.selfsim_raw},
                             {"selfsim_adjusted", s.selfsim_adjusted},
                             {"mev_raw", s.mev_raw},
                             {"mev_adjusted", s.mev_adjusted}});
      }
      out.push_back({{"word", w.word},
                     {"occurrences", w.occurrences},
                     {"unique_contexts", w.unique_contexts},
                     {"mean_selfsim_adjusted", w.mean_selfsim_adjusted},
                     {"layers", std::move(per_layer)}});
    }
    return out;
  };

  return {{"report", "contextuality-analysis"},
          {"schema_version", 1},
          {"model_name", report.model_name},
          {"layer_count", report.layers.size()},
          {"parameters", std::move(params)},
          {"corpus",
           {{"n_tokens", report.n_tokens},
            {"n_sentences", report.n_sentences_total},
            {"n_word_types", report.n_word_types},
            {"n_eligible_words", report.n_eligible_words},
            {"n_words_skipped", report.n_words_skipped}}},
          {"layers", std::move(layers)},
          {"words", {{"top", words_json(report.top_words)}, {"bottom", words_json(report.bottom_words)}}}};
}

std::string to_csv(const AnalysisReport& report) {
  std::ostringstream out;
  out << "layer,metric,raw,baseline,adjusted\n";
  auto row = [&](std::size_t layer, const char* metric, double raw, double baseline,
                 double adjusted) {
    out << layer << ',' << metric << ',' << number(raw) << ',' << number(baseline) << ','
        << number(adjusted) << '\n';
  };
  for (const auto& l : report.layers) {
    row(l.layer, "cosine_baseline", l.cosine_baseline.value, 0.0, l.cosine_baseline.value);
    row(l.layer, "mev_baseline", l.mev_baseline.value, 0.0, l.mev_baseline.value);
    row(l.layer, "selfsim", l.mean_selfsim_raw, l.cosine_baseline.value, l.mean_selfsim_adjusted);
    row(l.layer, "intrasim", l.mean_intrasim_raw, l.cosine_baseline.value, l.mean_intrasim_adjusted);
    row(l.layer, "mev", l.mean_mev_raw, l.mev_baseline.value, l.mean_mev_adjusted);
  }
  return out.str();
}

}  // namespace ctxgeo
