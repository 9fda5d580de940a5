#pragma once

// Contextuality measures over occurrence matrices and per-layer anisotropy
// baselines. All arithmetic is double precision; payload floats are upcast.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>

#include "ctxgeo/embedding_store.hpp"

namespace ctxgeo {

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws DegenerateError on a
/// zero-norm input and ContractError on a dimension mismatch.
double cosine(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Mean cosine over ordered pairs j != k of the columns:
///   1/(n^2 - n) * sum_j sum_{k != j} cos(c_j, c_k)
/// Evaluated as (|sum_j u_j|^2 - sum_j |u_j|^2) / (n^2 - n) over unit columns u_j,
/// which is O(n d) rather than O(n^2 d).
double self_similarity(const Eigen::Ref<const Eigen::MatrixXd>& columns);
double self_similarity(const OccurrenceMatrix& m);

/// Mean cosine between each token vector (column) and the sentence mean.
double intra_sentence_similarity(const Eigen::Ref<const Eigen::MatrixXd>& token_columns);

struct MevResult {
  std::string word;
  std::size_t layer = 0;
  Eigen::VectorXd singular_values;  // descending, min(d, n) entries
  double mev = 0.0;
};

/// Singular values of the matrix as given. No centering.
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// sigma_1^2 / sum_i sigma_i^2 of the uncentered matrix.
///
/// Note this is not the usual centered "explained variance": the shared mean
/// direction is left in, and the per-layer MEV baseline (same convention)
/// accounts for it.
double mev(const Eigen::Ref<const Eigen::MatrixXd>& columns);
MevResult mev(const OccurrenceMatrix& m);

enum class BaselineKind { cosine, mev };
const char* to_string(BaselineKind kind) noexcept;

struct BaselineEstimate {
  std::size_t layer = 0;
  BaselineKind kind = BaselineKind::cosine;
  double value = 0.0;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

/// Human-readable sampling rule recorded alongside cosine baselines.
inline constexpr const char* kBaselinePairRule =
    "uniform pairs of distinct occurrences; pairs of the same word type rejected";

/// Mean cosine over `samples` occurrence pairs drawn uniformly from all
/// occurrences of the corpus, x != y, same-word pairs rejected. The generator is
/// derived from (seed, layer) only.
BaselineEstimate cosine_baseline(const EmbeddingAccessor& vectors, const WordIndex& index,
                                 std::size_t layer, std::size_t samples = 1000,
                                 std::uint64_t seed = 0);

/// MEV of a d x k matrix of k = min(samples, corpus size) distinct occurrences
/// drawn uniformly without replacement.
BaselineEstimate mev_baseline(const EmbeddingAccessor& vectors, const WordIndex& index,
                              std::size_t layer, std::size_t samples = 1000,
                              std::uint64_t seed = 0);

enum class MeasureKind { self_similarity, intra_sentence_similarity, mev };

struct AdjustedMeasure {
  double raw = 0.0;
  double baseline = 0.0;
  double adjusted = 0.0;
};

/// raw - baseline. Cosine-type measures take the cosine baseline, MEV the MEV
/// baseline; anything else is a ContractError.
AdjustedMeasure adjust(double raw, MeasureKind measure, const BaselineEstimate& baseline);

}  // namespace ctxgeo
