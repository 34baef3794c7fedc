#pragma once

/// \file encoders.hpp
/// Enumeration of set partitions as restricted-growth strings in
/// lexicographic order.

#include <cstdint>
#include <string>
#include <vector>

#include "exlab/core.hpp"

namespace exlab {

/// Largest observation count accepted by exhaustive enumeration.
inline constexpr std::size_t kMaxEnumeratedObs = 14;

inline void require_enumerable(std::size_t n_obs) {
  if (n_obs == 0 || n_obs > kMaxEnumeratedObs)
    throw Error(ErrorKind::TooManyObservations,
                std::to_string(n_obs) + " observations; exhaustive search handles 1.." +
                    std::to_string(kMaxEnumeratedObs));
}

/// Number of ways to fill `remaining` positions of a restricted-growth string
/// whose prefix already uses `blocks` labels.
inline std::uint64_t completions(std::size_t remaining, std::size_t blocks) {
  // table[r][b] for r <= remaining, b <= blocks + remaining
  std::vector<std::vector<std::uint64_t>> table(remaining + 1,
                                                std::vector<std::uint64_t>(blocks + remaining + 2, 0));
  for (std::size_t b = 0; b < table[0].size(); ++b) table[0][b] = 1;
  for (std::size_t r = 1; r <= remaining; ++r)
    for (std::size_t b = 0; b + 1 < table[r].size(); ++b)
      table[r][b] = b * table[r - 1][b] + table[r - 1][b + 1];
  return table[remaining][blocks];
}

/// Bell number: the count of partitions of an n-set.
inline std::uint64_t bell_number(std::size_t n) { return n == 0 ? 1 : completions(n - 1, 1); }

/// Walks every restricted-growth string of length `n` whose first
/// `fixed` entries equal `prefix`, in lexicographic order.
class RgsCursor {
public:
  RgsCursor(std::size_t n, std::vector<std::uint32_t> prefix = {0})
      : fixed_(prefix.empty() ? 1 : prefix.size()), labels_(n, 0), prefix_max_(n, 0) {
    if (prefix.empty()) prefix = {0};
    for (std::size_t i = 0; i < prefix.size(); ++i) labels_[i] = prefix[i];
    for (std::size_t i = 0; i < n; ++i)
      prefix_max_[i] = i == 0 ? labels_[0] : std::max(prefix_max_[i - 1], labels_[i]);
  }

  const std::vector<std::uint32_t>& labels() const { return labels_; }
  std::uint32_t n_latent() const { return labels_.empty() ? 0 : prefix_max_.back() + 1; }

  /// Advances to the next string; false when the walk is exhausted.
  bool advance() {
    const std::size_t n = labels_.size();
    for (std::size_t i = n; i-- > fixed_;) {
      if (labels_[i] <= prefix_max_[i - 1]) {
        ++labels_[i];
        prefix_max_[i] = std::max(prefix_max_[i - 1], labels_[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
          labels_[j] = 0;
          prefix_max_[j] = prefix_max_[i];
        }
        return true;
      }
    }
    return false;
  }

  Encoder encoder() const {
    Encoder e;
    e.assignment = labels_;
    e.n_latent = n_latent();
    return e;
  }

private:
  std::size_t fixed_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint32_t> prefix_max_;
};

/// Calls `visit(const Encoder&)` for every partition of `n_obs` observations.
template <class Visit>
void for_each_encoder(std::size_t n_obs, Visit&& visit) {
  require_enumerable(n_obs);
  RgsCursor cur(n_obs);
  do {
    visit(cur.encoder());
  } while (cur.advance());
}

/// Materialized enumeration; practical up to about 12 observations.
inline std::vector<Encoder> enumerate_encoders(std::size_t n_obs) {
  std::vector<Encoder> out;
  out.reserve(static_cast<std::size_t>(bell_number(std::min<std::size_t>(n_obs, kMaxEnumeratedObs))));
  for_each_encoder(n_obs, [&](const Encoder& e) { out.push_back(e); });
  return out;
}

/// All restricted-growth strings of length `len`, in lexicographic order;
/// used to split an enumeration into independent ordered pieces.
inline std::vector<std::vector<std::uint32_t>> rgs_prefixes(std::size_t len) {
  std::vector<std::vector<std::uint32_t>> out;
  RgsCursor cur(len);
  do {
    out.push_back(cur.labels());
  } while (cur.advance());
  return out;
}

} // namespace exlab
