#pragma once

/// \file engine.hpp
/// Scores encoders against precomputed component tables and runs the
/// exhaustive search. Work is split into ordered pieces by restricted-growth
/// prefix; each piece keeps its own candidate fronts, and the fronts are
/// merged at the end, so the selection never depends on thread count.

#include <cmath>
#include <limits>
#include <vector>

#include "exlab/learning/encoders.hpp"
#include "exlab/learning/select.hpp"
#include "exlab/learning/statistics.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

struct SearchOptions {
  unsigned threads = 1;
  /// Record every encoder's objective values (enumeration order).
  bool keep_losses = false;
};

struct ObjectiveSelection {
  EncoderLoss selected;
  double min_loss = 0.0;
};

struct SearchResult {
  std::vector<ObjectiveSelection> selections;
  std::size_t n_evaluated = 0;
  /// Present when `keep_losses` was set: one row per encoder, one value per objective.
  std::vector<std::pair<Encoder, std::vector<double>>> rows;
};

class LossEngine {
public:
  LossEngine(std::vector<Component> components, std::size_t n_obs, std::size_t n_actions)
      : components_(std::move(components)), n_obs_(n_obs), n_actions_(n_actions) {}

  std::size_t n_obs() const { return n_obs_; }
  const std::vector<Component>& components() const { return components_; }

  /// Value of every objective for one encoder.
  std::vector<double> evaluate(const Encoder& enc, const std::vector<Objective>& objectives) const {
    if (enc.size() != n_obs_) throw Error(ErrorKind::ConfigMismatch, "encoder size differs from observation count");
    if (!enc.is_canonical()) throw Error(ErrorKind::InvalidEncoder, "encoder is not in canonical form");
    const double floor = common_floor(objectives);
    Scratch sc;
    std::vector<double> parts(components_.size());
    for (std::size_t c = 0; c < components_.size(); ++c)
      parts[c] = component_loss(components_[c], enc.assignment.data(), enc.n_latent, floor, sc);
    return combine(parts, objectives);
  }

  SearchResult search(const std::vector<Objective>& objectives, const SearchOptions& options = {}) const {
    require_enumerable(n_obs_);
    if (objectives.empty()) throw Error(ErrorKind::ConfigMismatch, "no objective to search");
    const double floor = common_floor(objectives);
    const std::size_t split = split_length(n_obs_);
    const auto prefixes = rgs_prefixes(split);

    struct Piece {
      std::vector<CandidateFront> fronts;
      std::size_t evaluated = 0;
      std::vector<std::pair<Encoder, std::vector<double>>> rows;
    };
    std::vector<Piece> pieces(prefixes.size());
    parallel_for(prefixes.size(), options.threads, [&](std::size_t p) {
      Piece& piece = pieces[p];
      piece.fronts.resize(objectives.size());
      Scratch sc;
      std::vector<double> parts(components_.size());
      RgsCursor cur(n_obs_, prefixes[p]);
      do {
        const auto& labels = cur.labels();
        const std::uint32_t m = cur.n_latent();
        for (std::size_t c = 0; c < components_.size(); ++c)
          parts[c] = component_loss(components_[c], labels.data(), m, floor, sc);
        std::vector<double> values = combine(parts, objectives);
        Encoder enc = cur.encoder();
        for (std::size_t o = 0; o < objectives.size(); ++o) piece.fronts[o].offer(enc, values[o]);
        if (options.keep_losses) piece.rows.emplace_back(std::move(enc), std::move(values));
        ++piece.evaluated;
      } while (cur.advance());
    });

    SearchResult result;
    std::vector<CandidateFront> merged(objectives.size());
    for (Piece& piece : pieces) {
      for (std::size_t o = 0; o < objectives.size(); ++o) merged[o].merge(piece.fronts[o]);
      result.n_evaluated += piece.evaluated;
      if (options.keep_losses)
        for (auto& row : piece.rows) result.rows.push_back(std::move(row));
    }
    for (std::size_t o = 0; o < objectives.size(); ++o)
      result.selections.push_back({merged[o].select(objectives[o].config.tolerance), merged[o].best_loss()});
    return result;
  }

private:
  struct Scratch {
    std::vector<double> num, den, val;
  };

  static double common_floor(const std::vector<Objective>& objectives) {
    if (objectives.empty()) return 1e-7;
    const double floor = objectives.front().config.smoothing_floor;
    for (const auto& o : objectives)
      if (o.config.smoothing_floor != floor)
        throw Error(ErrorKind::ConfigMismatch, "objectives in one search must share a smoothing floor");
    return floor;
  }

  static std::vector<double> combine(const std::vector<double>& parts, const std::vector<Objective>& objectives) {
    std::vector<double> values(objectives.size(), 0.0);
    for (std::size_t o = 0; o < objectives.size(); ++o)
      for (const auto& [c, w] : objectives[o].terms) values[o] += w * parts[c];
    return values;
  }

  static std::size_t split_length(std::size_t n) {
    if (n <= 6) return 1;
    return std::min<std::size_t>(6, n - 3);
  }

  double component_loss(const Component& comp, const std::uint32_t* phi, std::uint32_t m, double floor,
                        Scratch& sc) const {
    const std::size_t A = n_actions_;
    const std::size_t mm = static_cast<std::size_t>(m);
    double loss = 0.0;
    if (comp.key.kind == ComponentKind::Forward) {
      // rows (a, s), targets t
      sc.num.assign(A * mm * mm, 0.0);
      sc.val.assign(A * mm * mm, 0.0);
      sc.den.assign(A * mm, 0.0);
      for (const Cell& c : comp.fit) {
        const std::size_t row = c.action * mm + phi[c.x];
        sc.num[row * mm + phi[c.y]] += c.w;
        sc.den[row] += c.w;
      }
      for (const Cell& c : comp.score) sc.val[(c.action * mm + phi[c.x]) * mm + phi[c.y]] += c.w;
      const double uniform = 1.0 / static_cast<double>(mm);
      for (std::size_t row = 0; row < A * mm; ++row)
        for (std::size_t t = 0; t < mm; ++t) {
          const double v = sc.val[row * mm + t];
          if (v == 0.0) continue;
          const double num = sc.num[row * mm + t], den = sc.den[row];
          const double p = den > 0.0 ? (num > 0.0 ? num / den : floor) : uniform;
          loss -= v * std::log(p);
        }
      return loss;
    }
    // inverse families: rows (ctx, s, t), targets a
    const std::size_t rows = comp.contexts * mm * mm;
    sc.num.assign(rows * A, 0.0);
    sc.val.assign(rows * A, 0.0);
    sc.den.assign(rows, 0.0);
    for (const Cell& c : comp.fit) {
      const std::size_t row = (c.ctx * mm + phi[c.x]) * mm + phi[c.y];
      sc.num[row * A + c.action] += c.w;
      sc.den[row] += c.w;
    }
    for (const Cell& c : comp.score) sc.val[((c.ctx * mm + phi[c.x]) * mm + phi[c.y]) * A + c.action] += c.w;
    const double uniform = 1.0 / static_cast<double>(A);
    for (std::size_t row = 0; row < rows; ++row)
      for (std::size_t a = 0; a < A; ++a) {
        const double v = sc.val[row * A + a];
        if (v == 0.0) continue;
        const double num = sc.num[row * A + a], den = sc.den[row];
        const double p = den > 0.0 ? (num > 0.0 ? num / den : floor) : uniform;
        loss -= v * std::log(p);
      }
    return loss;
  }

  std::vector<Component> components_;
  std::size_t n_obs_;
  std::size_t n_actions_;
};

} // namespace exlab
