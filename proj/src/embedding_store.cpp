#include "ctxgeo/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>
#include <system_error>

#include <sys/mman.h>

#include "ctxgeo/errors.hpp"
#include "ctxgeo/seeding.hpp"
#include "mapped_file.hpp"

static_assert(std::endian::native == std::endian::little,
              "layer payloads are little-endian float32 and are mapped without byte swapping");
static_assert(sizeof(float) == 4);

namespace fs = std::filesystem;
using nlohmann::json;

namespace ctxgeo {

namespace {

constexpr const char* kMetaFile = "meta.json";

[[noreturn]] void schema_error(const fs::path& source, const std::string& detail) {
  throw FormatError(FormatErrorKind::schema, source, detail);
}

}  // namespace

fs::path layer_file_name(std::size_t layer) { return "layer_" + std::to_string(layer) + ".bin"; }

std::size_t DumpMeta::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

void DumpMeta::validate(const fs::path& source) const {
  if (dims.empty()) schema_error(source, "layer_count must be >= 1");
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (dims[l] == 0) schema_error(source, "dims[" + std::to_string(l) + "] must be positive");
  }
  if (sentences.empty()) schema_error(source, "corpus has no sentences");
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    if (s.sentence_id != i) {
      schema_error(source, "sentence_id " + std::to_string(s.sentence_id) + " at position " +
                               std::to_string(i) + " (ids must be consecutive from 0)");
    }
    if (s.tokens.empty()) schema_error(source, "sentence " + std::to_string(i) + " has no tokens");
    for (const auto& t : s.tokens) {
      if (t.empty()) schema_error(source, "sentence " + std::to_string(i) + " has an empty token");
    }
  }
}

json to_json(const DumpMeta& meta) {
  json j = meta.attributes.is_object() ? meta.attributes : json::object();
  j["model_name"] = meta.model_name;
  j["layer_count"] = meta.layer_count();
  j["dims"] = meta.dims;
  json sentences = json::array();
  for (const auto& s : meta.sentences) {
    sentences.push_back({{"sentence_id", s.sentence_id}, {"tokens", s.tokens}});
  }
  j["sentences"] = std::move(sentences);
  return j;
}

DumpMeta meta_from_json(const json& j, const fs::path& source) {
  if (!j.is_object()) schema_error(source, "top level must be an object");
  auto require = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) schema_error(source, std::string("missing field '") + key + "'");
    return *it;
  };

  DumpMeta meta;
  const auto& name = require("model_name");
  if (!name.is_string()) schema_error(source, "model_name must be a string");
  meta.model_name = name.get<std::string>();

  const auto& layer_count = require("layer_count");
  if (!layer_count.is_number_unsigned() || layer_count.get<std::size_t>() == 0) {
    schema_error(source, "layer_count must be a positive integer");
  }
  const auto& dims = require("dims");
  if (!dims.is_array()) schema_error(source, "dims must be an array");
  for (const auto& d : dims) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      schema_error(source, "dims entries must be positive integers");
    }
    meta.dims.push_back(d.get<std::size_t>());
  }
  if (meta.dims.size() != layer_count.get<std::size_t>()) {
    schema_error(source, "dims has " + std::to_string(meta.dims.size()) +
                             " entries but layer_count is " +
                             std::to_string(layer_count.get<std::size_t>()));
  }

  const auto& sentences = require("sentences");
  if (!sentences.is_array()) schema_error(source, "sentences must be an array");
  meta.sentences.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    if (!s.is_object()) schema_error(source, "sentences[" + std::to_string(i) + "] must be an object");
    SentenceRecord rec;
    rec.sentence_id = static_cast<std::uint32_t>(i);
    if (auto id = s.find("sentence_id"); id != s.end()) {
      if (!id->is_number_unsigned()) {
        schema_error(source, "sentences[" + std::to_string(i) + "].sentence_id must be an integer");
      }
      rec.sentence_id = id->get<std::uint32_t>();
    }
    auto tokens = s.find("tokens");
    if (tokens == s.end() || !tokens->is_array()) {
      schema_error(source, "sentences[" + std::to_string(i) + "].tokens must be an array");
    }
    rec.tokens.reserve(tokens->size());
    for (const auto& t : *tokens) {
      if (!t.is_string()) {
        schema_error(source, "sentences[" + std::to_string(i) + "] has a non-string token");
      }
      rec.tokens.push_back(t.get<std::string>());
    }
    meta.sentences.push_back(std::move(rec));
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "model_name" && it.key() != "layer_count" && it.key() != "dims" &&
        it.key() != "sentences") {
      meta.attributes[it.key()] = it.value();
    }
  }
  meta.validate(source);
  return meta;
}

// ---------------------------------------------------------------------------
// EmbeddingAccessor

EmbeddingAccessor EmbeddingAccessor::from_memory(std::vector<std::vector<float>> layers,
                                                 std::vector<std::size_t> dims, std::size_t rows) {
  if (layers.size() != dims.size()) {
    throw ContractError("from_memory: " + std::to_string(layers.size()) + " layers but " +
                        std::to_string(dims.size()) + " dims");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].size() != rows * dims[l]) {
      throw FormatError(FormatErrorKind::dimension_mismatch, layer_file_name(l),
                        "expected " + std::to_string(rows * dims[l]) + " floats, got " +
                            std::to_string(layers[l].size()));
    }
  }
  auto owned = std::make_shared<std::vector<std::vector<float>>>(std::move(layers));
  EmbeddingAccessor a;
  for (const auto& layer : *owned) a.layers_.emplace_back(layer.data(), layer.size());
  a.dims_ = std::move(dims);
  a.rows_ = rows;
  a.storage_ = std::move(owned);
  return a;
}

std::size_t EmbeddingAccessor::dim(std::size_t layer) const {
  if (layer >= dims_.size()) {
    throw RangeError("layer " + std::to_string(layer) + " out of range (layer_count " +
                     std::to_string(dims_.size()) + ")");
  }
  return dims_[layer];
}

std::span<const float> EmbeddingAccessor::layer_data(std::size_t layer) const {
  dim(layer);
  return layers_[layer];
}

std::span<const float> EmbeddingAccessor::row(std::size_t layer, std::uint64_t global_row) const {
  const std::size_t d = dim(layer);
  if (global_row >= rows_) {
    throw RangeError("row " + std::to_string(global_row) + " out of range (rows " +
                     std::to_string(rows_) + ")");
  }
  return layers_[layer].subspan(global_row * d, d);
}

Eigen::VectorXd EmbeddingAccessor::vector(std::size_t layer, std::uint64_t global_row) const {
  auto r = row(layer, global_row);
  return Eigen::Map<const Eigen::VectorXf>(r.data(), static_cast<Eigen::Index>(r.size()))
      .cast<double>();
}

void EmbeddingAccessor::release(std::size_t layer) const {
  dim(layer);
  const auto data = layers_[layer];
  if (!mapped_ || data.empty()) return;
  // Mappings start page-aligned; the tail is rounded up to a page by the kernel.
  ::madvise(const_cast<float*>(data.data()), data.size_bytes(), MADV_DONTNEED);
}

// ---------------------------------------------------------------------------
// Writing

DumpWriter::DumpWriter(const fs::path& dir, DumpMeta meta)
    : dir_(dir), meta_(std::move(meta)) {
  meta_.validate();
  expected_rows_ = meta_.token_count();
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoError(dir_, "cannot create directory");
  files_.resize(meta_.layer_count());
  written_rows_.assign(meta_.layer_count(), 0);
  for (std::size_t l = 0; l < files_.size(); ++l) {
    const auto path = dir_ / layer_file_name(l);
    files_[l].open(path, std::ios::binary | std::ios::trunc);
    if (!files_[l]) throw IoError(path, "cannot open for writing");
  }
}

DumpWriter::~DumpWriter() = default;

void DumpWriter::append(std::size_t layer, std::span<const float> data) {
  if (finished_) throw ContractError("DumpWriter::append after finish");
  if (layer >= files_.size()) {
    throw RangeError("layer " + std::to_string(layer) + " out of range");
  }
  const std::size_t d = meta_.dims[layer];
  const auto file = layer_file_name(layer);
  if (data.size() % d != 0) {
    throw FormatError(FormatErrorKind::dimension_mismatch, file,
                      std::to_string(data.size()) + " floats is not a whole number of rows of dim " +
                          std::to_string(d));
  }
  const std::size_t rows = data.size() / d;
  if (written_rows_[layer] + rows > expected_rows_) {
    throw FormatError(FormatErrorKind::dimension_mismatch, file,
                      "more rows than the corpus has tokens (" + std::to_string(expected_rows_) +
                          ")");
  }
  files_[layer].write(reinterpret_cast<const char*>(data.data()),
                      static_cast<std::streamsize>(data.size_bytes()));
  if (!files_[layer]) throw IoError(dir_ / file, "write failed");
  written_rows_[layer] += rows;
}

void DumpWriter::finish() {
  if (finished_) return;
  for (std::size_t l = 0; l < files_.size(); ++l) {
    if (written_rows_[l] != expected_rows_) {
      throw FormatError(FormatErrorKind::dimension_mismatch, layer_file_name(l),
                        std::to_string(written_rows_[l]) + " rows written, corpus has " +
                            std::to_string(expected_rows_) + " tokens");
    }
    files_[l].close();
    if (!files_[l]) throw IoError(dir_ / layer_file_name(l), "close failed");
  }
  const auto meta_path = dir_ / kMetaFile;
  std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(meta_path, "cannot open for writing");
  out << to_json(meta_).dump() << '\n';
  out.close();
  if (!out) throw IoError(meta_path, "write failed");
  finished_ = true;
}

void write_dump(const DumpMeta& meta, std::span<const std::vector<float>> layers,
                const fs::path& dir) {
  meta.validate();
  if (layers.size() != meta.layer_count()) {
    throw FormatError(FormatErrorKind::dimension_mismatch, kMetaFile,
                      "layer_count " + std::to_string(meta.layer_count()) + " but " +
                          std::to_string(layers.size()) + " payloads supplied");
  }
  const std::size_t rows = meta.token_count();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].size() != rows * meta.dims[l]) {
      throw FormatError(FormatErrorKind::dimension_mismatch, layer_file_name(l),
                        "expected " + std::to_string(rows) + " x " + std::to_string(meta.dims[l]) +
                            " floats, got " + std::to_string(layers[l].size()));
    }
  }
  DumpWriter writer(dir, meta);
  for (std::size_t l = 0; l < layers.size(); ++l) writer.append(l, layers[l]);
  writer.finish();
}

void write_dump(const EmbeddingDump& dump, const fs::path& dir) {
  dump.meta.validate();
  if (dump.vectors.layer_count() != dump.meta.layer_count() ||
      dump.vectors.rows() != dump.meta.token_count()) {
    throw FormatError(FormatErrorKind::dimension_mismatch, kMetaFile,
                      "vectors do not match meta (layers or rows)");
  }
  DumpWriter writer(dir, dump.meta);
  for (std::size_t l = 0; l < dump.meta.layer_count(); ++l) {
    if (dump.vectors.dim(l) != dump.meta.dims[l]) {
      throw FormatError(FormatErrorKind::dimension_mismatch, layer_file_name(l),
                        "vector dim differs from meta");
    }
    writer.append(l, dump.vectors.layer_data(l));
  }
  writer.finish();
}

// ---------------------------------------------------------------------------
// Loading

class DumpLoader {
 public:
  static EmbeddingDump load(const fs::path& dir) {
    const auto meta_path = dir / kMetaFile;
    if (!fs::is_regular_file(meta_path)) {
      throw FormatError(FormatErrorKind::missing_file, meta_path, "not found");
    }
    json j;
    {
      std::ifstream in(meta_path, std::ios::binary);
      if (!in) throw IoError(meta_path, "cannot open for reading");
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw FormatError(FormatErrorKind::schema, meta_path, e.what());
      }
    }
    EmbeddingDump dump;
    dump.meta = meta_from_json(j, meta_path);
    const std::size_t rows = dump.meta.token_count();

    // Validate every payload before mapping any of them.
    for (std::size_t l = 0; l < dump.meta.layer_count(); ++l) {
      const auto path = dir / layer_file_name(l);
      if (!fs::is_regular_file(path)) {
        throw FormatError(FormatErrorKind::missing_file, path,
                          "meta.json declares " + std::to_string(dump.meta.layer_count()) +
                              " layers");
      }
      const std::uintmax_t expected = static_cast<std::uintmax_t>(rows) * dump.meta.dims[l] * 4U;
      const std::uintmax_t actual = fs::file_size(path);
      if (actual < expected) {
        throw FormatError(FormatErrorKind::truncated_payload, path,
                          std::to_string(actual) + " bytes, expected " + std::to_string(expected));
      }
      if (actual > expected) {
        throw FormatError(FormatErrorKind::oversized_payload, path,
                          std::to_string(actual) + " bytes, expected " + std::to_string(expected));
      }
    }
    const auto extra = dir / layer_file_name(dump.meta.layer_count());
    if (fs::exists(extra)) {
      throw FormatError(FormatErrorKind::schema, extra,
                        "payload beyond layer_count " + std::to_string(dump.meta.layer_count()));
    }

    auto maps = std::make_shared<std::vector<std::unique_ptr<detail::MappedFile>>>();
    EmbeddingAccessor& acc = dump.vectors;
    for (std::size_t l = 0; l < dump.meta.layer_count(); ++l) {
      maps->push_back(std::make_unique<detail::MappedFile>(dir / layer_file_name(l)));
      auto bytes = maps->back()->bytes();
      acc.layers_.emplace_back(reinterpret_cast<const float*>(bytes.data()), bytes.size() / 4);
    }
    acc.dims_ = dump.meta.dims;
    acc.rows_ = rows;
    acc.storage_ = std::move(maps);
    acc.mapped_ = true;
    return dump;
  }
};

EmbeddingDump load_dump(const fs::path& dir) { return DumpLoader::load(dir); }

// ---------------------------------------------------------------------------
// Indexing

std::string WordIndex::normalize(std::string_view token) const {
  std::string s(token);
  if (lowercase_) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return s;
}

std::optional<WordIndex::WordId> WordIndex::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const OccurrenceRef> WordIndex::occurrences(WordId id) const {
  return occurrences_.at(id);
}

std::span<const OccurrenceRef> WordIndex::occurrences(std::string_view word) const {
  auto id = find(word);
  if (!id) return {};
  return occurrences_[*id];
}

std::size_t WordIndex::unique_context_count(std::string_view word) const {
  auto id = find(word);
  return id ? context_counts_[*id] : 0;
}

bool WordIndex::eligible(std::string_view word) const {
  auto id = find(word);
  return id && eligible(*id);
}

std::vector<std::string> WordIndex::eligible_words() const {
  std::vector<std::string> out;
  for (WordId id = 0; id < words_.size(); ++id) {
    if (eligible(id)) out.push_back(words_[id]);
  }
  return out;
}

std::uint64_t WordIndex::sentence_offset(std::size_t sentence_id) const {
  if (sentence_id >= sentence_count()) {
    throw RangeError("sentence " + std::to_string(sentence_id) + " out of range");
  }
  return sentence_offsets_[sentence_id];
}

std::size_t WordIndex::sentence_length(std::size_t sentence_id) const {
  return static_cast<std::size_t>(sentence_offsets_.at(sentence_id + 1) -
                                  sentence_offset(sentence_id));
}

WordIndex build_index(const DumpMeta& meta, std::size_t min_contexts, bool lowercase) {
  if (min_contexts < 1) throw ContractError("min_contexts must be >= 1");
  WordIndex index;
  index.min_contexts_ = min_contexts;
  index.lowercase_ = lowercase;

  // First pass: provisional ids in first-seen order.
  std::unordered_map<std::string, WordIndex::WordId> provisional;
  std::vector<std::string> names;
  index.row_words_.reserve(meta.token_count());
  index.sentence_offsets_.reserve(meta.sentences.size() + 1);
  std::uint64_t row = 0;
  for (const auto& s : meta.sentences) {
    index.sentence_offsets_.push_back(row);
    for (const auto& t : s.tokens) {
      auto key = index.normalize(t);
      auto [it, inserted] =
          provisional.try_emplace(std::move(key), static_cast<WordIndex::WordId>(names.size()));
      if (inserted) names.push_back(it->first);
      index.row_words_.push_back(it->second);
      ++row;
    }
  }
  index.sentence_offsets_.push_back(row);

  // Remap to sorted order so word ids (and everything keyed by them) are canonical.
  std::vector<WordIndex::WordId> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names[a] < names[b]; });
  std::vector<WordIndex::WordId> remap(names.size());
  index.words_.reserve(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = static_cast<WordIndex::WordId>(i);
    index.words_.push_back(std::move(names[order[i]]));
  }
  for (auto& w : index.row_words_) w = remap[w];
  for (std::size_t i = 0; i < index.words_.size(); ++i) {
    index.ids_.emplace(index.words_[i], static_cast<WordIndex::WordId>(i));
  }

  index.occurrences_.resize(index.words_.size());
  index.context_counts_.assign(index.words_.size(), 0);
  row = 0;
  for (const auto& s : meta.sentences) {
    for (std::uint32_t i = 0; i < s.tokens.size(); ++i, ++row) {
      const auto w = index.row_words_[row];
      auto& occ = index.occurrences_[w];
      // Occurrences arrive in corpus order, so a new sentence id is a new context.
      if (occ.empty() || occ.back().sentence_id != s.sentence_id) ++index.context_counts_[w];
      occ.push_back({s.sentence_id, i, row});
    }
  }
  return index;
}

OccurrenceMatrix occurrence_matrix(std::string_view word, std::size_t layer, const WordIndex& index,
                                   const EmbeddingAccessor& vectors, std::size_t cap,
                                   std::uint64_t seed) {
  if (cap < 1) throw ContractError("occurrence cap must be >= 1");
  const std::size_t d = vectors.dim(layer);
  auto id = index.find(word);
  if (!id) throw EligibilityError("word '" + std::string(word) + "' does not occur in the corpus");
  if (!index.eligible(*id)) {
    throw EligibilityError("word '" + std::string(word) + "' occurs in " +
                           std::to_string(index.unique_context_count(*id)) +
                           " unique contexts (< " + std::to_string(index.min_contexts()) + ")");
  }
  auto all = index.occurrences(*id);

  OccurrenceMatrix m;
  m.word = std::string(word);
  m.layer = layer;
  m.total_occurrences = all.size();
  if (all.size() > cap) {
    auto engine = derive_engine(seed, Stream::occurrence_cap, {fnv1a(word)});
    m.refs.reserve(cap);
    std::sample(all.begin(), all.end(), std::back_inserter(m.refs), cap, engine);
  } else {
    m.refs.assign(all.begin(), all.end());
  }

  m.columns.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m.refs.size()));
  for (std::size_t j = 0; j < m.refs.size(); ++j) {
    auto r = vectors.row(layer, m.refs[j].global_row);
    m.columns.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXf>(r.data(), static_cast<Eigen::Index>(d)).cast<double>();
  }
  return m;
}

}  // namespace ctxgeo
