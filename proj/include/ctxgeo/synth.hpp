#pragma once

// Seeded synthetic corpora with known geometry, used as ground truth for the
// metrics and the acceptance suite.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxgeo/embedding_store.hpp"

namespace ctxgeo {

enum class SynthKind {
  isotropic,       // i.i.d. standard Gaussian tokens, normalized
  cone,            // mu * m + eps, m a fixed unit direction, eps ~ N(0, I/d)
  static_vectors,  // one fixed vector per word type (per layer)
  toy_contextual,  // windowed mixing with per-layer rotation, see generate()
};

const char* to_string(SynthKind kind) noexcept;
std::optional<SynthKind> parse_synth_kind(std::string_view name);

struct SynthSpec {
  SynthKind kind = SynthKind::static_vectors;
  std::size_t d = 64;
  std::size_t sentences = 1000;
  std::size_t sentence_length = 10;
  std::size_t vocab = 200;
  /// Layer count for isotropic, cone and static. toy_contextual uses mixing.size().
  std::size_t layers = 1;
  /// Norm of the shared mean for cone; optional shared mean on toy_contextual layer 0.
  double mean_scale = 0.0;
  /// toy_contextual mixing weights lambda_0..lambda_L, lambda_0 = 0.
  std::vector<double> mixing;
  /// Token frequency ~ 1/(rank+1)^zipf_exponent; 0 draws words uniformly.
  double zipf_exponent = 0.0;
  std::uint64_t seed = 0;

  std::size_t layer_count() const noexcept;
  /// Throws ContractError describing the first invalid field.
  void validate() const;
};

/// Fully deterministic from spec.seed.
///
/// toy_contextual: layer 0 gives every word type a fixed seeded unit vector
/// (plus mean_scale along a shared direction). Layer l replaces each token by
///   R_l * normalize((1 - lambda_l) h_{l-1}(i) + lambda_l * mean_{|j-i|<=2} h_{l-1}(j))
/// where the window is clipped to the sentence and R_l is a fixed seeded rotation.
EmbeddingDump generate(const SynthSpec& spec);

/// Word type names used by the generator ("w0000", "w0001", ...).
std::string synth_word(std::size_t id, std::size_t vocab);

}  // namespace ctxgeo
