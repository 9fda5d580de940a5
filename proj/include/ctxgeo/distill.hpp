#pragma once

// First-principal-component static embeddings and their text format.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxgeo/embedding_store.hpp"

namespace ctxgeo {

/// word -> unit vector, all of one dimension. Words keep insertion order.
class StaticEmbeddingTable {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  StaticEmbeddingTable() = default;
  explicit StaticEmbeddingTable(std::size_t dim, std::optional<std::size_t> layer = std::nullopt);

  std::optional<std::size_t> layer() const noexcept { return layer_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  Eigen::Map<const Eigen::VectorXd> vector(std::size_t i) const;
  /// dim x size, column i = words()[i].
  Eigen::Map<const Eigen::MatrixXd> matrix() const;

  /// Throws ContractError on a duplicate word, a dim mismatch or a vector
  /// whose norm is not 1 within kUnitTolerance.
  void insert(std::string word, const Eigen::Ref<const Eigen::VectorXd>& unit_vector);

 private:
  std::optional<std::size_t> layer_;
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

struct PrincipalComponent {
  Eigen::VectorXd vector;  // unit norm
  double sigma1 = 0.0;
  /// sigma_1 and sigma_2 agree within 1e-9 relative, so the direction is not unique.
  bool ambiguous = false;
};

/// Left singular vector for sigma_1 of the uncentered occurrence matrix. Sign
/// convention: dot(vector, column mean) >= 0; when that dot is zero (relative to
/// the column scale) the first nonzero component is made positive.
PrincipalComponent pc_static_embedding(const Eigen::Ref<const Eigen::MatrixXd>& columns);
PrincipalComponent pc_static_embedding(const OccurrenceMatrix& m);

struct Distillation {
  StaticEmbeddingTable table;
  std::vector<std::string> ambiguous_words;
  /// Eligible words with fewer than 2 occurrences (possible only with min_contexts = 1).
  std::size_t skipped_words = 0;
};

/// PC embedding of every eligible word in sorted word order. Throws
/// InsufficientDataError when no word can be distilled.
Distillation distill(const WordIndex& index, const EmbeddingAccessor& vectors, std::size_t layer,
                     std::size_t cap = 1000, std::uint64_t seed = 0);
StaticEmbeddingTable distill_table(const WordIndex& index, const EmbeddingAccessor& vectors,
                                   std::size_t layer, std::size_t cap = 1000,
                                   std::uint64_t seed = 0);

/// "N d" header, then `word c1 c2 ... cd` per line with shortest round-trip decimals.
void write_table(const StaticEmbeddingTable& table, std::ostream& out);
void write_table(const StaticEmbeddingTable& table, const std::filesystem::path& path);

/// Accepts files with or without the "N d" header. Vectors not already unit
/// within kUnitTolerance are normalized; zero vectors are a ParseError.
StaticEmbeddingTable read_table(std::istream& in, const std::string& source = "<stream>");
StaticEmbeddingTable read_table(const std::filesystem::path& path);

}  // namespace ctxgeo
