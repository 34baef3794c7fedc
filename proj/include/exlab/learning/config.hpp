#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exlab/core.hpp"

namespace exlab {

enum class LossVariant { ACState, ACDF, FullMulti, ImpreciseK };

inline std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::ACState: return "ACState";
    case LossVariant::ACDF: return "ACDF";
    case LossVariant::FullMulti: return "FullMulti";
    case LossVariant::ImpreciseK: return "ImpreciseK";
  }
  return "ACState";
}

inline LossVariant parse_variant(const std::string& s) {
  if (s == "ACState" || s == "acstate" || s == "ac-state") return LossVariant::ACState;
  if (s == "ACDF" || s == "acdf") return LossVariant::ACDF;
  if (s == "FullMulti" || s == "fullmulti" || s == "full-multi") return LossVariant::FullMulti;
  if (s == "ImpreciseK" || s == "imprecisek" || s == "imprecise-k") return LossVariant::ImpreciseK;
  throw Error(ErrorKind::SchemaError, "unknown loss variant '" + s + "'");
}

/// Loss functional and selection settings.
struct LossConfig {
  LossVariant variant = LossVariant::ACDF;
  std::size_t K = 1;
  /// Probability substituted for a zero count under a seen context.
  double smoothing_floor = 1e-7;
  /// Relative slack around the minimum loss when choosing the smallest encoder.
  double tolerance = 0.001;

  void validate() const {
    if (K < 1) throw Error(ErrorKind::ConfigMismatch, "K must be at least 1");
    if (!(smoothing_floor > 0.0 && smoothing_floor < 1.0))
      throw Error(ErrorKind::ConfigMismatch, "smoothing floor must lie in (0,1)");
    if (!(tolerance >= 0.0)) throw Error(ErrorKind::ConfigMismatch, "tolerance must be non-negative");
  }

  std::string describe() const { return to_string(variant) + "@K=" + std::to_string(K); }
};

/// One encoder with its loss.
struct EncoderLoss {
  Encoder encoder;
  double loss = 0.0;
};

struct LearnResult {
  Encoder encoder;
  double loss = 0.0;
  std::size_t n_evaluated = 0;
  /// Every evaluated encoder in enumeration order, when requested.
  std::optional<std::vector<EncoderLoss>> per_encoder_losses;
  LossConfig config;
  std::uint64_t seed = 0;
};

} // namespace exlab
