#pragma once

// On-disk embedding dump and the word/sentence indexes built over it.
//
// A dump directory holds:
//   meta.json     model_name, layer_count, dims[L], sentences[{sentence_id, tokens[]}]
//   layer_<l>.bin little-endian float32, row-major, row r = vector of global token r
//
// Layer 0 is the model's uncontextualized input layer. Global rows enumerate
// tokens sentence by sentence, so row = (sum of prior sentence lengths) + token_index.

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxgeo {

struct SentenceRecord {
  std::uint32_t sentence_id = 0;
  std::vector<std::string> tokens;
};

struct DumpMeta {
  std::string model_name;
  std::vector<std::size_t> dims;  // one entry per layer
  std::vector<SentenceRecord> sentences;
  /// Additional top-level meta.json fields (e.g. the extractor's pooling mode),
  /// preserved verbatim on load and write.
  nlohmann::json attributes = nlohmann::json::object();

  std::size_t layer_count() const noexcept { return dims.size(); }
  std::size_t token_count() const noexcept;

  /// Throws FormatError(schema) on an empty corpus, empty sentences or tokens,
  /// non-consecutive sentence ids, zero dims or zero layers.
  void validate(const std::filesystem::path& source = "meta.json") const;
};

nlohmann::json to_json(const DumpMeta& meta);
DumpMeta meta_from_json(const nlohmann::json& j, const std::filesystem::path& source = "meta.json");

/// Read-only view over per-layer row-major float32 payloads. Copies share the
/// underlying storage (heap buffers or memory-mapped files).
class EmbeddingAccessor {
 public:
  EmbeddingAccessor() = default;

  /// Takes ownership of in-memory payloads. Each layer must hold rows * dims[l] floats.
  static EmbeddingAccessor from_memory(std::vector<std::vector<float>> layers,
                                       std::vector<std::size_t> dims, std::size_t rows);

  std::size_t layer_count() const noexcept { return dims_.size(); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim(std::size_t layer) const;

  std::span<const float> row(std::size_t layer, std::uint64_t global_row) const;
  std::span<const float> layer_data(std::size_t layer) const;

  /// The row upcast to double.
  Eigen::VectorXd vector(std::size_t layer, std::uint64_t global_row) const;

  /// Drops resident pages of a memory-mapped layer (they are re-read on the
  /// next access). No-op for in-memory payloads.
  void release(std::size_t layer) const;

 private:
  friend class DumpLoader;
  bool mapped_ = false;
  std::vector<std::span<const float>> layers_;
  std::vector<std::size_t> dims_;
  std::size_t rows_ = 0;
  std::shared_ptr<const void> storage_;
};

struct EmbeddingDump {
  DumpMeta meta;
  EmbeddingAccessor vectors;
};

/// Writes meta.json and layer_<l>.bin. Throws FormatError on row/dim mismatch
/// and IoError when the directory or files cannot be written.
void write_dump(const DumpMeta& meta, std::span<const std::vector<float>> layers,
                const std::filesystem::path& dir);
void write_dump(const EmbeddingDump& dump, const std::filesystem::path& dir);

/// Validates meta.json and every payload's byte length, then memory-maps the
/// payloads. Each failure names the offending file.
EmbeddingDump load_dump(const std::filesystem::path& dir);

/// Streams rows to layer files without holding a layer in memory. meta.json is
/// written by finish() once every layer holds exactly token_count rows.
class DumpWriter {
 public:
  DumpWriter(const std::filesystem::path& dir, DumpMeta meta);
  ~DumpWriter();
  DumpWriter(const DumpWriter&) = delete;
  DumpWriter& operator=(const DumpWriter&) = delete;

  /// Appends whole rows (data.size() must be a multiple of dims[layer]).
  void append(std::size_t layer, std::span<const float> data);
  void finish();

 private:
  std::filesystem::path dir_;
  DumpMeta meta_;
  std::size_t expected_rows_;
  std::vector<std::ofstream> files_;
  std::vector<std::size_t> written_rows_;
  bool finished_ = false;
};

std::filesystem::path layer_file_name(std::size_t layer);

struct OccurrenceRef {
  std::uint32_t sentence_id = 0;
  std::uint32_t token_index = 0;
  std::uint64_t global_row = 0;

  friend bool operator==(const OccurrenceRef&, const OccurrenceRef&) = default;
};

/// word -> occurrences (corpus order) plus per-row word ids and sentence offsets.
/// Immutable once built.
class WordIndex {
 public:
  using WordId = std::uint32_t;

  std::size_t min_contexts() const noexcept { return min_contexts_; }
  bool lowercase() const noexcept { return lowercase_; }

  /// Distinct word types, sorted.
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<WordId> find(std::string_view word) const;

  std::span<const OccurrenceRef> occurrences(std::string_view word) const;
  std::span<const OccurrenceRef> occurrences(WordId id) const;
  std::size_t unique_context_count(std::string_view word) const;
  std::size_t unique_context_count(WordId id) const { return context_counts_.at(id); }
  bool eligible(std::string_view word) const;
  bool eligible(WordId id) const { return context_counts_.at(id) >= min_contexts_; }
  std::vector<std::string> eligible_words() const;

  std::size_t total_occurrences() const noexcept { return row_words_.size(); }
  WordId word_of_row(std::uint64_t global_row) const { return row_words_.at(global_row); }

  std::size_t sentence_count() const noexcept { return sentence_offsets_.size() - 1; }
  std::uint64_t sentence_offset(std::size_t sentence_id) const;
  std::size_t sentence_length(std::size_t sentence_id) const;

  /// Token after the optional lowercase fold.
  std::string normalize(std::string_view token) const;

 private:
  friend WordIndex build_index(const DumpMeta&, std::size_t, bool);

  std::size_t min_contexts_ = 5;
  bool lowercase_ = false;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::vector<OccurrenceRef>> occurrences_;
  std::vector<std::size_t> context_counts_;
  std::vector<WordId> row_words_;
  std::vector<std::uint64_t> sentence_offsets_;  // size = sentences + 1
};

/// A word is eligible when it occurs in at least min_contexts distinct
/// sentences. lowercase applies an ASCII case fold to every token first.
WordIndex build_index(const DumpMeta& meta, std::size_t min_contexts = 5, bool lowercase = false);

/// d x n matrix of one word's vectors in one layer, one column per occurrence.
struct OccurrenceMatrix {
  std::string word;
  std::size_t layer = 0;
  Eigen::MatrixXd columns;
  std::vector<OccurrenceRef> refs;  // refs[j] produced column j
  std::size_t total_occurrences = 0;  // before capping

  std::size_t size() const noexcept { return static_cast<std::size_t>(columns.cols()); }
  bool capped() const noexcept { return refs.size() < total_occurrences; }
};

/// Gathers the word's layer vectors. When the word has more than cap
/// occurrences a uniform subsample of size cap is drawn (corpus order kept)
/// from a generator derived from (seed, word), so every layer sees the same
/// occurrences.
OccurrenceMatrix occurrence_matrix(std::string_view word, std::size_t layer,
                                   const WordIndex& index, const EmbeddingAccessor& vectors,
                                   std::size_t cap = 1000, std::uint64_t seed = 0);

}  // namespace ctxgeo
