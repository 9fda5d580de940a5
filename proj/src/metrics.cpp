#include "ctxgeo/metrics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <random>

#include "ctxgeo/errors.hpp"
#include "ctxgeo/seeding.hpp"

namespace ctxgeo {

namespace {

Eigen::VectorXd row_as_double(const EmbeddingAccessor& vectors, std::size_t layer,
                              std::uint64_t row) {
  auto r = vectors.row(layer, row);
  return Eigen::Map<const Eigen::VectorXf>(r.data(), static_cast<Eigen::Index>(r.size()))
      .cast<double>();
}

void check_corpus(const EmbeddingAccessor& vectors, const WordIndex& index, std::size_t samples) {
  if (samples < 2) throw ContractError("baseline needs samples >= 2");
  if (index.total_occurrences() != vectors.rows()) {
    throw ContractError("index covers " + std::to_string(index.total_occurrences()) +
                        " occurrences but the payload has " + std::to_string(vectors.rows()) +
                        " rows");
  }
  if (vectors.rows() < 2) throw InsufficientDataError("corpus has fewer than 2 occurrences");
}

}  // namespace

const char* to_string(BaselineKind kind) noexcept {
  return kind == BaselineKind::cosine ? "cosine" : "mev";
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) {
    throw ContractError("cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                        std::to_string(v.size()));
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DegenerateError("cosine of a zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double self_similarity(const Eigen::Ref<const Eigen::MatrixXd>& columns) {
  const auto n = columns.cols();
  if (n < 2) {
    throw InsufficientDataError("self-similarity needs at least 2 occurrences, got " +
                                std::to_string(n));
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(columns.rows());
  double diagonal = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = columns.col(j).norm();
    if (norm == 0.0) throw DegenerateError("zero-norm occurrence vector");
    const Eigen::VectorXd unit = columns.col(j) / norm;
    sum += unit;
    diagonal += unit.squaredNorm();
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  return std::clamp((sum.squaredNorm() - diagonal) / pairs, -1.0, 1.0);
}

double self_similarity(const OccurrenceMatrix& m) { return self_similarity(m.columns); }

double intra_sentence_similarity(const Eigen::Ref<const Eigen::MatrixXd>& token_columns) {
  const auto n = token_columns.cols();
  if (n < 1) throw InsufficientDataError("empty sentence");
  const Eigen::VectorXd mean = token_columns.rowwise().mean();
  if (mean.norm() == 0.0) throw DegenerateError("sentence mean vector is zero");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += cosine(mean, token_columns.col(i));
  return total / static_cast<double>(n);
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

double mev(const Eigen::Ref<const Eigen::MatrixXd>& columns) {
  if (columns.cols() < 2) {
    throw InsufficientDataError("MEV needs at least 2 occurrences, got " +
                                std::to_string(columns.cols()));
  }
  if (columns.squaredNorm() == 0.0) throw DegenerateError("MEV of an all-zero matrix");
  const Eigen::VectorXd s = singular_values(columns);
  return s(0) * s(0) / s.squaredNorm();
}

MevResult mev(const OccurrenceMatrix& m) {
  if (m.columns.cols() < 2) {
    throw InsufficientDataError("MEV of '" + m.word + "' needs at least 2 occurrences");
  }
  if (m.columns.squaredNorm() == 0.0) throw DegenerateError("MEV of an all-zero matrix");
  MevResult r;
  r.word = m.word;
  r.layer = m.layer;
  r.singular_values = singular_values(m.columns);
  const double s1 = r.singular_values(0);
  r.mev = s1 * s1 / r.singular_values.squaredNorm();
  return r;
}

BaselineEstimate cosine_baseline(const EmbeddingAccessor& vectors, const WordIndex& index,
                                 std::size_t layer, std::size_t samples, std::uint64_t seed) {
  check_corpus(vectors, index, samples);
  vectors.dim(layer);
  if (index.words().size() < 2) {
    throw InsufficientDataError("cosine baseline needs at least 2 distinct word types");
  }

  auto engine = derive_engine(seed, Stream::cosine_baseline, {layer});
  std::uniform_int_distribution<std::uint64_t> pick(0, vectors.rows() - 1);
  // Guards against corpora dominated by a single word type.
  const std::size_t max_draws = 1000 * samples + 1000;
  std::size_t draws = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    do {
      if (++draws > max_draws) {
        throw InsufficientDataError("could not draw distinct-word occurrence pairs");
      }
      x = pick(engine);
      y = pick(engine);
    } while (x == y || index.word_of_row(x) == index.word_of_row(y));
    total += cosine(row_as_double(vectors, layer, x), row_as_double(vectors, layer, y));
  }
  return {layer, BaselineKind::cosine, total / static_cast<double>(samples), samples, seed};
}

BaselineEstimate mev_baseline(const EmbeddingAccessor& vectors, const WordIndex& index,
                              std::size_t layer, std::size_t samples, std::uint64_t seed) {
  check_corpus(vectors, index, samples);
  const std::size_t d = vectors.dim(layer);
  const std::size_t k = std::min<std::size_t>(samples, vectors.rows());

  std::vector<std::uint64_t> population(vectors.rows());
  std::iota(population.begin(), population.end(), std::uint64_t{0});
  std::vector<std::uint64_t> chosen;
  chosen.reserve(k);
  auto engine = derive_engine(seed, Stream::mev_baseline, {layer});
  std::sample(population.begin(), population.end(), std::back_inserter(chosen), k, engine);

  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    m.col(static_cast<Eigen::Index>(j)) = row_as_double(vectors, layer, chosen[j]);
  }
  return {layer, BaselineKind::mev, mev(m), k, seed};
}

AdjustedMeasure adjust(double raw, MeasureKind measure, const BaselineEstimate& baseline) {
  const bool wants_cosine = measure != MeasureKind::mev;
  if (wants_cosine != (baseline.kind == BaselineKind::cosine)) {
    throw ContractError(std::string("cannot adjust a ") +
                        (wants_cosine ? "cosine-type measure" : "MEV") + " by a " +
                        to_string(baseline.kind) + " baseline");
  }
  return {raw, baseline.value, raw - baseline.value};
}

}  // namespace ctxgeo
