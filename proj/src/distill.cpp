#include "ctxgeo/distill.hpp"

#include <Eigen/SVD>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ctxgeo/errors.hpp"

namespace ctxgeo {

// ---------------------------------------------------------------------------
// StaticEmbeddingTable

StaticEmbeddingTable::StaticEmbeddingTable(std::size_t dim, std::optional<std::size_t> layer)
    : layer_(layer), dim_(dim) {
  if (dim == 0) throw ContractError("embedding table dim must be positive");
}

std::optional<std::size_t> StaticEmbeddingTable::find(std::string_view word) const {
  auto it = lookup_.find(std::string(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Eigen::Map<const Eigen::VectorXd> StaticEmbeddingTable::vector(std::size_t i) const {
  if (i >= words_.size()) throw RangeError("table entry " + std::to_string(i) + " out of range");
  return {data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<const Eigen::MatrixXd> StaticEmbeddingTable::matrix() const {
  return {data_.data(), static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(words_.size())};
}

void StaticEmbeddingTable::insert(std::string word, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (dim_ == 0) throw ContractError("insert into a table without a dimension");
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw ContractError("vector for '" + word + "' has dim " + std::to_string(v.size()) +
                        ", table dim is " + std::to_string(dim_));
  }
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw ContractError("vector for '" + word + "' is not unit norm");
  }
  if (lookup_.contains(word)) throw ContractError("duplicate word '" + word + "'");
  lookup_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), v.data(), v.data() + v.size());
}

// ---------------------------------------------------------------------------
// Principal component

PrincipalComponent pc_static_embedding(const Eigen::Ref<const Eigen::MatrixXd>& columns) {
  if (columns.cols() < 2) {
    throw InsufficientDataError("PC embedding needs at least 2 occurrences, got " +
                                std::to_string(columns.cols()));
  }
  if (columns.squaredNorm() == 0.0) throw DegenerateError("PC of an all-zero matrix");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  PrincipalComponent pc;
  pc.sigma1 = s(0);
  pc.ambiguous = s.size() > 1 && s(0) - s(1) <= 1e-9 * s(0);
  pc.vector = svd.matrixU().col(0).normalized();

  const Eigen::VectorXd mean = columns.rowwise().mean();
  const double scale = columns.colwise().norm().maxCoeff();
  const double alignment = pc.vector.dot(mean);
  bool flip = false;
  if (std::abs(alignment) > 1e-12 * scale) {
    flip = alignment < 0.0;
  } else {
    for (Eigen::Index i = 0; i < pc.vector.size(); ++i) {
      if (std::abs(pc.vector(i)) > 1e-12) {
        flip = pc.vector(i) < 0.0;
        break;
      }
    }
  }
  if (flip) pc.vector = -pc.vector;
  return pc;
}

PrincipalComponent pc_static_embedding(const OccurrenceMatrix& m) {
  return pc_static_embedding(m.columns);
}

Distillation distill(const WordIndex& index, const EmbeddingAccessor& vectors, std::size_t layer,
                     std::size_t cap, std::uint64_t seed) {
  Distillation out{StaticEmbeddingTable(vectors.dim(layer), layer), {}, 0};
  for (const auto& word : index.eligible_words()) {
    auto m = occurrence_matrix(word, layer, index, vectors, cap, seed);
    if (m.size() < 2) {
      ++out.skipped_words;
      continue;
    }
    auto pc = pc_static_embedding(m);
    if (pc.ambiguous) out.ambiguous_words.push_back(word);
    out.table.insert(word, pc.vector);
  }
  if (out.table.empty()) {
    throw InsufficientDataError("no eligible words to distill (min_contexts " +
                                std::to_string(index.min_contexts()) + ")");
  }
  return out;
}

StaticEmbeddingTable distill_table(const WordIndex& index, const EmbeddingAccessor& vectors,
                                   std::size_t layer, std::size_t cap, std::uint64_t seed) {
  return distill(index, vectors, layer, cap, seed).table;
}

// ---------------------------------------------------------------------------
// Text format

void write_table(const StaticEmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    auto v = table.vector(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v(k));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

void write_table(const StaticEmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  write_table(table, out);
  out.close();
  if (!out) throw IoError(path, "write failed");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

StaticEmbeddingTable read_table(std::istream& in, const std::string& source) {
  StaticEmbeddingTable table;
  std::optional<std::size_t> declared_count;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  Eigen::VectorXd v;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (!seen_content) {
      seen_content = true;
      std::size_t n = 0;
      std::size_t d = 0;
      if (fields.size() == 2 && parse_number(fields[0], n) && parse_number(fields[1], d)) {
        if (d == 0) throw ParseError(source, line_no, "header declares dimension 0");
        declared_count = n;
        dim = d;
        table = StaticEmbeddingTable(dim);
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(source, line_no, "expected a word and its components");
    const std::size_t d = fields.size() - 1;
    if (dim == 0) {
      dim = d;
      table = StaticEmbeddingTable(dim);
    } else if (d != dim) {
      throw ParseError(source, line_no,
                       "vector has " + std::to_string(d) + " components, expected " +
                           std::to_string(dim));
    }
    v.resize(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      double x = 0.0;
      if (!parse_number(fields[k + 1], x) || !std::isfinite(x)) {
        throw ParseError(source, line_no, "non-numeric component '" + std::string(fields[k + 1]) + "'");
      }
      v(static_cast<Eigen::Index>(k)) = x;
    }
    std::string word(fields[0]);
    if (table.contains(word)) throw ParseError(source, line_no, "duplicate word '" + word + "'");
    const double norm = v.norm();
    if (norm == 0.0) throw ParseError(source, line_no, "zero vector for '" + word + "'");
    if (std::abs(norm - 1.0) > StaticEmbeddingTable::kUnitTolerance) v /= norm;
    table.insert(std::move(word), v);
  }
  if (declared_count && *declared_count != table.size()) {
    throw ParseError(source, 1,
                     "header declares " + std::to_string(*declared_count) + " words, file has " +
                         std::to_string(table.size()));
  }
  if (table.empty()) throw ParseError(source, line_no, "no vectors");
  return table;
}

StaticEmbeddingTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return read_table(in, path.string());
}

}  // namespace ctxgeo
