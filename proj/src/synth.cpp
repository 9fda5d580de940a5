#include "ctxgeo/synth.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "ctxgeo/errors.hpp"
#include "ctxgeo/seeding.hpp"

namespace ctxgeo {

namespace {

enum : std::uint64_t { kTokens = 1, kLayer = 2, kMean = 3, kRotation = 4 };

Eigen::VectorXd gaussian(Engine& engine, std::size_t d, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(engine);
  return v;
}

Eigen::VectorXd unit_gaussian(Engine& engine, std::size_t d) {
  Eigen::VectorXd v;
  do {
    v = gaussian(engine, d);
  } while (v.norm() == 0.0);
  return v.normalized();
}

/// Haar-distributed orthogonal matrix: Q of a Gaussian matrix with R's diagonal signs folded in.
Eigen::MatrixXd random_rotation(Engine& engine, std::size_t d) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(engine);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

void store(std::vector<float>& layer, std::size_t row, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const std::size_t d = static_cast<std::size_t>(v.size());
  for (std::size_t k = 0; k < d; ++k) {
    layer[row * d + k] = static_cast<float>(v(static_cast<Eigen::Index>(k)));
  }
}

}  // namespace

const char* to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::isotropic:
      return "isotropic";
    case SynthKind::cone:
      return "cone";
    case SynthKind::static_vectors:
      return "static";
    case SynthKind::toy_contextual:
      return "toy_contextual";
  }
  return "unknown";
}

std::optional<SynthKind> parse_synth_kind(std::string_view name) {
  for (auto k : {SynthKind::isotropic, SynthKind::cone, SynthKind::static_vectors,
                 SynthKind::toy_contextual}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::size_t SynthSpec::layer_count() const noexcept {
  return kind == SynthKind::toy_contextual ? mixing.size() : layers;
}

void SynthSpec::validate() const {
  if (d < 2) throw ContractError("synth: d must be >= 2");
  if (sentences < 1) throw ContractError("synth: sentences must be >= 1");
  if (sentence_length < 1) throw ContractError("synth: sentence_length must be >= 1");
  if (vocab < 1) throw ContractError("synth: vocab must be >= 1");
  if (!std::isfinite(mean_scale) || mean_scale < 0.0) {
    throw ContractError("synth: mean scale must be finite and >= 0");
  }
  if (!std::isfinite(zipf_exponent) || zipf_exponent < 0.0) {
    throw ContractError("synth: zipf exponent must be finite and >= 0");
  }
  if (kind == SynthKind::toy_contextual) {
    if (mixing.empty()) throw ContractError("synth: toy_contextual needs mixing weights");
    if (mixing.front() != 0.0) {
      throw ContractError("synth: lambda_0 must be 0 (layer 0 is uncontextualized)");
    }
    for (double lambda : mixing) {
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ContractError("synth: mixing weights must lie in [0, 1]");
      }
    }
  } else if (layers < 1) {
    throw ContractError("synth: layers must be >= 1");
  }
}

std::string synth_word(std::size_t id, std::size_t vocab) {
  std::size_t width = 1;
  for (std::size_t v = vocab > 0 ? vocab - 1 : 0; v >= 10; v /= 10) ++width;
  width = std::max<std::size_t>(width, 4);
  std::string digits = std::to_string(id);
  return "w" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

EmbeddingDump generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t d = spec.d;
  const std::size_t L = spec.layer_count();

  // Corpus.
  DumpMeta meta;
  meta.model_name = std::string("synthetic-") + to_string(spec.kind);
  meta.dims.assign(L, d);
  meta.attributes["synth"] = {{"kind", to_string(spec.kind)},
                              {"d", spec.d},
                              {"vocab", spec.vocab},
                              {"sentence_length", spec.sentence_length},
                              {"mean_scale", spec.mean_scale},
                              {"mixing", spec.mixing},
                              {"zipf_exponent", spec.zipf_exponent},
                              {"seed", spec.seed}};
  std::vector<std::size_t> row_word;
  {
    auto engine = derive_engine(spec.seed, Stream::synth, {kTokens});
    std::vector<double> weights(spec.vocab);
    for (std::size_t r = 0; r < spec.vocab; ++r) {
      weights[r] = std::pow(static_cast<double>(r + 1), -spec.zipf_exponent);
    }
    std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
    meta.sentences.resize(spec.sentences);
    row_word.reserve(spec.sentences * spec.sentence_length);
    for (std::size_t s = 0; s < spec.sentences; ++s) {
      meta.sentences[s].sentence_id = static_cast<std::uint32_t>(s);
      for (std::size_t t = 0; t < spec.sentence_length; ++t) {
        const std::size_t w = draw(engine);
        row_word.push_back(w);
        meta.sentences[s].tokens.push_back(synth_word(w, spec.vocab));
      }
    }
  }
  const std::size_t rows = row_word.size();

  std::vector<std::vector<float>> layers(L, std::vector<float>(rows * d));
  switch (spec.kind) {
    case SynthKind::isotropic:
      for (std::size_t l = 0; l < L; ++l) {
        auto engine = derive_engine(spec.seed, Stream::synth, {kLayer, l});
        for (std::size_t r = 0; r < rows; ++r) store(layers[l], r, unit_gaussian(engine, d));
      }
      break;
    case SynthKind::cone:
      for (std::size_t l = 0; l < L; ++l) {
        auto mean_engine = derive_engine(spec.seed, Stream::synth, {kMean, l});
        const Eigen::VectorXd mean = spec.mean_scale * unit_gaussian(mean_engine, d);
        auto engine = derive_engine(spec.seed, Stream::synth, {kLayer, l});
        const double noise = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t r = 0; r < rows; ++r) {
          store(layers[l], r, mean + gaussian(engine, d, noise));
        }
      }
      break;
    case SynthKind::static_vectors:
      for (std::size_t l = 0; l < L; ++l) {
        auto engine = derive_engine(spec.seed, Stream::synth, {kLayer, l});
        std::vector<Eigen::VectorXd> table;
        table.reserve(spec.vocab);
        for (std::size_t w = 0; w < spec.vocab; ++w) table.push_back(unit_gaussian(engine, d));
        for (std::size_t r = 0; r < rows; ++r) store(layers[l], r, table[row_word[r]]);
      }
      break;
    case SynthKind::toy_contextual: {
      Eigen::MatrixXd h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows));
      {
        auto engine = derive_engine(spec.seed, Stream::synth, {kLayer, 0});
        auto mean_engine = derive_engine(spec.seed, Stream::synth, {kMean, 0});
        const Eigen::VectorXd mean = spec.mean_scale * unit_gaussian(mean_engine, d);
        std::vector<Eigen::VectorXd> table;
        table.reserve(spec.vocab);
        for (std::size_t w = 0; w < spec.vocab; ++w) table.push_back(unit_gaussian(engine, d) + mean);
        for (std::size_t r = 0; r < rows; ++r) {
          h.col(static_cast<Eigen::Index>(r)) = table[row_word[r]];
          store(layers[0], r, h.col(static_cast<Eigen::Index>(r)));
        }
      }
      const auto len = static_cast<Eigen::Index>(spec.sentence_length);
      for (std::size_t l = 1; l < L; ++l) {
        auto engine = derive_engine(spec.seed, Stream::synth, {kRotation, l});
        const Eigen::MatrixXd rotation = random_rotation(engine, d);
        const double lambda = spec.mixing[l];
        Eigen::MatrixXd next(h.rows(), h.cols());
        for (std::size_t s = 0; s < spec.sentences; ++s) {
          const auto base = static_cast<Eigen::Index>(s) * len;
          for (Eigen::Index i = 0; i < len; ++i) {
            const Eigen::Index lo = std::max<Eigen::Index>(0, i - 2);
            const Eigen::Index hi = std::min<Eigen::Index>(len - 1, i + 2);
            const Eigen::VectorXd window = h.middleCols(base + lo, hi - lo + 1).rowwise().mean();
            Eigen::VectorXd mixed = (1.0 - lambda) * h.col(base + i) + lambda * window;
            const double norm = mixed.norm();
            if (norm > 0.0) mixed /= norm;
            next.col(base + i) = rotation * mixed;
          }
        }
        h = std::move(next);
        for (std::size_t r = 0; r < rows; ++r) store(layers[l], r, h.col(static_cast<Eigen::Index>(r)));
      }
      break;
    }
  }

  EmbeddingDump dump;
  dump.vectors = EmbeddingAccessor::from_memory(std::move(layers), meta.dims, rows);
  dump.meta = std::move(meta);
  return dump;
}

}  // namespace ctxgeo
