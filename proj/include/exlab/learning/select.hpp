#pragma once

/// \file select.hpp
/// Minimal-size selection: among encoders whose loss is within a relative
/// tolerance of the minimum, take the fewest latent states, then the
/// lexicographically smallest restricted-growth string.

#include <algorithm>
#include <limits>
#include <map>
#include <vector>

#include "exlab/learning/config.hpp"

namespace exlab {

inline bool selection_precedes(const Encoder& a, const Encoder& b) {
  if (a.n_latent != b.n_latent) return a.n_latent < b.n_latent;
  return a.assignment < b.assignment;
}

inline Encoder select_encoder(const std::vector<EncoderLoss>& losses, double tolerance) {
  if (losses.empty()) throw Error(ErrorKind::EmptyStream, "no encoders to select from");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& el : losses) best = std::min(best, el.loss);
  const double threshold = best * (1.0 + tolerance);
  const EncoderLoss* chosen = nullptr;
  for (const auto& el : losses)
    if (el.loss <= threshold && (!chosen || selection_precedes(el.encoder, chosen->encoder))) chosen = &el;
  return chosen->encoder;
}

/// Streaming form of the same rule. For each latent count it keeps only
/// encoders not dominated by a smaller string with no larger loss; the
/// answer is always among those survivors, whatever the final minimum.
/// Fronts merge associatively and commutatively.
class CandidateFront {
public:
  void offer(const Encoder& enc, double loss) {
    best_ = std::min(best_, loss);
    auto& front = fronts_[enc.n_latent];
    // front: strings ascending, losses strictly descending
    auto pos = std::lower_bound(front.begin(), front.end(), enc,
                                [](const EncoderLoss& el, const Encoder& e) { return el.encoder < e; });
    if (pos != front.begin() && std::prev(pos)->loss <= loss) return;
    if (pos != front.end() && pos->encoder == enc) {
      if (pos->loss <= loss) return;
      pos->loss = loss;
    } else {
      pos = front.insert(pos, {enc, loss});
    }
    auto tail = std::next(pos);
    while (tail != front.end() && tail->loss >= loss) tail = front.erase(tail);
  }

  void merge(const CandidateFront& other) {
    for (const auto& [m, front] : other.fronts_)
      for (const auto& el : front) offer(el.encoder, el.loss);
    best_ = std::min(best_, other.best_);
  }

  bool empty() const { return fronts_.empty(); }
  double best_loss() const { return best_; }

  /// Selected encoder and its loss.
  EncoderLoss select(double tolerance) const {
    if (fronts_.empty()) throw Error(ErrorKind::EmptyStream, "no encoders to select from");
    const double threshold = best_ * (1.0 + tolerance);
    for (const auto& [m, front] : fronts_)
      for (const auto& el : front)
        if (el.loss <= threshold) return el;
    throw Error(ErrorKind::EmptyStream, "no candidate within tolerance");
  }

private:
  std::map<std::uint32_t, std::vector<EncoderLoss>> fronts_;
  double best_ = std::numeric_limits<double>::infinity();
};

} // namespace exlab
