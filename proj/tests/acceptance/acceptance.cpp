// Acceptance checks. Usage: acceptance <1..6|all>. Each criterion prints its
// individual checks followed by one summary line "criterion N: PASS|FAIL".
// The process exits non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exlab/exlab.hpp"
#include "support/oracles.hpp"

using namespace exlab;

namespace {

// Tolerances and budgets.
constexpr double kCriterion1Seconds = 10.0;
constexpr double kCriterion2Seconds = 300.0;
constexpr double kCriterion3Seconds = 1800.0;
constexpr double kSampledVsExactTolerance = 0.02;
constexpr std::size_t kRandomDynamics = 200;
constexpr std::size_t kTrials = 50;
constexpr std::size_t kSweepSteps = 8000;
constexpr std::size_t kPropertySteps = 100000;
constexpr std::size_t kEncodersPerEnv = 20;
constexpr std::size_t kShuffles = 1000;

class Checker {
public:
  void check(bool ok, const std::string& what) {
    std::cout << "  [" << (ok ? "ok" : "FAIL") << "] " << what << "\n";
    all_ &= ok;
  }
  bool passed() const { return all_; }

private:
  bool all_ = true;
};

LossConfig cfg(LossVariant v, std::size_t K) {
  LossConfig c;
  c.variant = v;
  c.K = K;
  return c;
}

std::string blocks_text(const Encoder& enc, const ExBmdp& env) {
  std::string s;
  for (const auto& block : enc.blocks()) {
    s += "{";
    for (std::size_t i = 0; i < block.size(); ++i) s += (i ? "," : "") + env.label(block[i]);
    s += "}";
  }
  return s;
}

std::string describe(const Encoder& enc, const ExBmdp& env) {
  return enc.to_string() + " " + blocks_text(enc, env) + " " + to_string(classify(enc, env).kind);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool criterion1() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto endo = zoo_build("fig2_chain4").env.endo();
  const std::size_t d = diameter(endo);
  const Witness w = witness_distance(endo, 2, 3);
  c.check(d == 3, "fig2_chain4 diameter = " + std::to_string(d) + " (expected 3)");
  c.check(w && *w == 4, "fig2_chain4 W(c,d) = " + (w ? std::to_string(*w) : std::string("inf")) + " (expected 4)");
  c.check(dprime_bound(d) == 21, "bound 2D^2+D = " + std::to_string(dprime_bound(d)) + " (expected 21)");
  const DPrimeReport rep = verify_dprime_theorem(endo);
  c.check(rep.pass && w && *w <= rep.bound, "fig2_chain4 theorem check: " + rep.message);

  std::size_t passed = 0, counterexamples = 0;
  for (std::size_t i = 0; i < kRandomDynamics; ++i) {
    const std::uint64_t seed = derive_seed(2024, i);
    const std::size_t n = 1 + seed % 8, a = 1 + (seed >> 8) % 3;
    const auto r = verify_dprime_theorem(random_exbmdp(n, 1, a, seed).endo());
    passed += r.pass;
    counterexamples += r.counterexample.has_value();
  }
  c.check(passed == kRandomDynamics && counterexamples == 0,
          std::to_string(passed) + "/" + std::to_string(kRandomDynamics) +
              " random irreducible dynamics pass, counterexamples = " + std::to_string(counterexamples));
  const double secs = seconds_since(t0);
  c.check(secs < kCriterion1Seconds, "runtime " + std::to_string(secs) + " s < 10 s");
  return c.passed();
}

bool criterion2() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();

  {
    const ExBmdp env = zoo_build("fig2_chain4").env;
    const auto sr = search_exact(env, {cfg(LossVariant::ACState, 3), cfg(LossVariant::ACState, 4),
                                       cfg(LossVariant::ACDF, 4)});
    const Encoder& k3 = sr.selections[0].selected.encoder;
    const std::size_t cx = *env.find_label("c"), dx = *env.find_label("d");
    c.check(k3.n_latent == 3 && classify(k3, env).kind == OutcomeKind::Incorrect && k3[cx] == k3[dx],
            "fig2_chain4 ACState@K=3 selects a 3-state Incorrect encoder merging {c,d}: got " + describe(k3, env));
    for (std::size_t i : {1u, 2u}) {
      const Encoder& e = sr.selections[i].selected.encoder;
      c.check(e == Encoder::trivial(4) && classify(e, env).kind == OutcomeKind::CorrectMinimal,
              std::string("fig2_chain4 ") + (i == 1 ? "ACState@K=4" : "ACDF@K=4") +
                  " selects the 4-state encoder: got " + describe(e, env));
    }
  }

  {
    const ExBmdp env = zoo_build("fig2_periodic5").env;
    std::vector<LossConfig> configs;
    for (std::size_t K = 1; K <= 15; ++K) configs.push_back(cfg(LossVariant::ACState, K));
    configs.push_back(cfg(LossVariant::ACDF, 2));
    const auto sr = search_exact(env, configs);
    std::string bad;
    for (std::size_t K = 1; K <= 15; ++K) {
      const Encoder& e = sr.selections[K - 1].selected.encoder;
      if (e.n_latent != 3 || classify(e, env).kind != OutcomeKind::Incorrect)
        bad += " K=" + std::to_string(K) + ":" + e.to_string();
    }
    c.check(bad.empty(), "fig2_periodic5 ACState@K=1..15 selects a 3-state Incorrect encoder" +
                             (bad.empty() ? std::string(" (e.g. ") + describe(sr.selections[14].selected.encoder, env) + ")"
                                          : "; violations:" + bad));
    const Encoder& acdf = sr.selections.back().selected.encoder;
    c.check(acdf.n_latent == 5 && classify(acdf, env).kind == OutcomeKind::CorrectMinimal,
            "fig2_periodic5 ACDF@K=2 selects the 5-state encoder: got " + describe(acdf, env));
  }

  {
    const ExBmdp env = zoo_build("fig1_branching").env;
    const std::size_t D = diameter(env.endo());
    std::vector<LossConfig> configs;
    for (std::size_t K = 1; K <= D; ++K) configs.push_back(cfg(LossVariant::ACState, K));
    for (std::size_t K = 1; K <= 3; ++K) configs.push_back(cfg(LossVariant::ACDF, K));
    const auto sr = search_exact(env, configs);
    // {a,f} {b,c,g,h} {d,e,i,j}
    const Encoder fig_1d = Encoder::parse("0112201122");
    for (std::size_t K = 1; K <= D; ++K) {
      const Encoder& e = sr.selections[K - 1].selected.encoder;
      c.check(e == fig_1d, "fig1_branching ACState@K=" + std::to_string(K) + " selects " + blocks_text(fig_1d, env) +
                               ": got " + describe(e, env));
    }
    for (std::size_t K = 1; K <= 3; ++K) {
      const Encoder& e = sr.selections[D + K - 1].selected.encoder;
      c.check(e.n_latent == 5 && classify(e, env).kind == OutcomeKind::CorrectMinimal,
              "fig1_branching ACDF@K=" + std::to_string(K) + " selects a 5-state CorrectMinimal encoder: got " +
                  describe(e, env));
    }
  }

  {
    const ExBmdp env = zoo_build("prime_cycle", {{"p", 3}, {"q", 5}}).env;
    std::vector<LossConfig> configs;
    for (std::size_t K = 1; K <= 7; ++K) configs.push_back(cfg(LossVariant::ACState, K));
    configs.push_back(cfg(LossVariant::ACDF, 1));
    const auto sr = search_exact(env, configs);
    std::string bad;
    for (std::size_t K = 1; K <= 6; ++K) {
      const Encoder& e = sr.selections[K - 1].selected.encoder;
      if (classify(e, env).kind == OutcomeKind::CorrectMinimal) bad += " K=" + std::to_string(K);
    }
    c.check(bad.empty(), "prime_cycle(3,5) ACState fails for every K<=6" +
                             (bad.empty() ? std::string() : "; succeeded at" + bad));
    const Encoder& k7 = sr.selections[6].selected.encoder;
    c.check(classify(k7, env).kind == OutcomeKind::CorrectMinimal,
            "prime_cycle(3,5) ACState@K=7 succeeds: got " + describe(k7, env));
    const Encoder& acdf = sr.selections[7].selected.encoder;
    c.check(classify(acdf, env).kind == OutcomeKind::CorrectMinimal,
            "prime_cycle(3,5) ACDF@K=1 succeeds: got " + describe(acdf, env));
  }

  {
    const ExBmdp env = zoo_build("fullmulti_hex").env;
    const auto sr = search_exact(env, {cfg(LossVariant::FullMulti, 2), cfg(LossVariant::FullMulti, 3),
                                       cfg(LossVariant::FullMulti, 4)});
    for (std::size_t i = 0; i < 3; ++i) {
      const Encoder& e = sr.selections[i].selected.encoder;
      c.check(e.n_latent == 5 && classify(e, env).kind == OutcomeKind::Incorrect,
              "fullmulti_hex FullMulti@K=" + std::to_string(i + 2) + " selects a 5-state Incorrect encoder: got " +
                  describe(e, env));
    }
  }

  {
    const ExBmdp env = zoo_build("selfedge_triangle").env;
    const Encoder e = learn_exact(env, cfg(LossVariant::ImpreciseK, 2)).encoder;
    c.check(e.n_latent > 3, "selfedge_triangle ImpreciseK@K=2 selects more than 3 states: got " + describe(e, env));
  }

  const double secs = seconds_since(t0);
  c.check(secs < kCriterion2Seconds, "runtime " + std::to_string(secs) + " s < 300 s");
  return c.passed();
}

bool criterion3(unsigned threads) {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig config;
  config.env.zoo = "prime_cycle";
  config.env.params = {{"p", 3}, {"q", 5}};
  config.variants = {LossVariant::ACState, LossVariant::ACDF};
  config.K = {1, 2, 3, 4, 5, 6, 7};
  config.steps = {kSweepSteps};
  config.trials = kTrials;
  config.base_seed = 0;
  const auto rows = run_sweep(config, {threads, false});
  std::size_t errors = 0;
  for (const auto& r : rows) errors += !r.error.empty();
  c.check(errors == 0, std::to_string(rows.size()) + " rows, " + std::to_string(errors) + " failed cells");
  for (const auto& cell : summarize(rows)) {
    const std::string rate = std::to_string(cell.minimal) + "/" + std::to_string(cell.n);
    const std::string name = to_string(cell.variant) + "@K=" + std::to_string(cell.K);
    if (cell.variant == LossVariant::ACDF && cell.K == 1)
      c.check(cell.minimal >= 48, name + " success " + rate + " >= 48/50");
    if (cell.variant == LossVariant::ACState && cell.K <= 6)
      c.check(cell.minimal <= 2, name + " success " + rate + " <= 2/50");
    if (cell.variant == LossVariant::ACState && cell.K == 7)
      c.check(cell.minimal >= 48, name + " success " + rate + " >= 48/50");
  }
  const double secs = seconds_since(t0);
  c.check(secs < kCriterion3Seconds, "runtime " + std::to_string(secs) + " s < 1800 s");
  return c.passed();
}

bool criterion4() {
  Checker c;
  {
    const ExBmdp env = zoo_build("periodic_coupling10").env;
    const std::size_t K = max_finite_witness(env.endo());
    const Encoder e = learn_exact(env, cfg(LossVariant::ACDF, K)).encoder;
    const Outcome o = classify(e, env);
    c.check(e.n_latent == 5 && o.kind == OutcomeKind::CorrectMinimal,
            "periodic_coupling10 ACDF@K=" + std::to_string(K) + " (max finite witness) selects a 5-state "
            "CorrectMinimal encoder: got " + describe(e, env));
  }
  {
    const ExBmdp env = zoo_build("nonunique2x2").env;
    auto enc = [&](std::initializer_list<std::pair<const char*, int>> labels) {
      std::vector<int> l(env.n_obs());
      for (const auto& [name, v] : labels) l[*env.find_label(name)] = v;
      return Encoder::canonical(l);
    };
    const Encoder first = enc({{"a0", 0}, {"a1", 0}, {"b0", 1}, {"b1", 1}});
    const Encoder second = enc({{"a0", 0}, {"b1", 0}, {"a1", 1}, {"b0", 1}});
    c.check(classify(first, env).kind == OutcomeKind::CorrectMinimal,
            "nonunique2x2 " + blocks_text(first, env) + " is " + to_string(classify(first, env).kind));
    c.check(classify(second, env).kind == OutcomeKind::CorrectMinimal,
            "nonunique2x2 " + blocks_text(second, env) + " is " + to_string(classify(second, env).kind));
    const Encoder singles = Encoder::trivial(env.n_obs());
    c.check(classify(singles, env).kind == OutcomeKind::CorrectNonMinimal,
            "nonunique2x2 all-singletons is " + to_string(classify(singles, env).kind));
  }
  return c.passed();
}

bool criterion5() {
  Checker c;
  {
    const std::vector<std::pair<std::string, ZooParams>> envs = {{"fig2_chain4", {}},
                                                                 {"fig2_periodic5", {}},
                                                                 {"fig1_branching", {}},
                                                                 {"prime_cycle", {{"p", 3}, {"q", 5}}},
                                                                 {"selfedge_triangle", {}}};
    const LossConfig config = cfg(LossVariant::ACDF, 2);
    const ObjectivePlan plan = plan_objectives({config});
    double worst = 0.0;
    std::string worst_at;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      const ExBmdp env = zoo_build(envs[i].first, envs[i].second).env;
      const auto [train, validation] = sample_train_validation(env, {1, kPropertySteps, {}}, derive_seed(99, i));
      const LossEngine sampled(sampled_components(plan.components, train, validation, config.K, env.n_obs(),
                                                  env.n_actions()),
                               env.n_obs(), env.n_actions());
      const LossEngine exact(exact_components(plan.components, env), env.n_obs(), env.n_actions());
      Rng rng(derive_seed(7, i));
      std::vector<Encoder> encoders{env.endo_encoder(), Encoder::trivial(env.n_obs()),
                                    Encoder::all_in_one(env.n_obs())};
      while (encoders.size() < kEncodersPerEnv) {
        std::vector<std::size_t> l(env.n_obs());
        const std::size_t m = 1 + rng.uniform_index(env.n_obs());
        for (auto& v : l) v = rng.uniform_index(m);
        encoders.push_back(Encoder::canonical(l));
      }
      for (const auto& e : encoders) {
        const double gap =
            std::abs(sampled.evaluate(e, plan.objectives)[0] - exact.evaluate(e, plan.objectives)[0]);
        if (gap > worst) {
          worst = gap;
          worst_at = envs[i].first + " " + e.to_string();
        }
      }
    }
    c.check(worst <= kSampledVsExactTolerance, "sampled vs exact ACDF@K=2 loss at 1e5 steps, 5 envs x 20 encoders: "
                                               "max gap " + std::to_string(worst) + " (" + worst_at + ") <= 0.02");
  }
  {
    LearnOptions opts;
    opts.keep_losses = true;
    auto losses = *learn_exact(zoo_build("fig1_branching").env, cfg(LossVariant::ACState, 2), opts).per_encoder_losses;
    const std::string reference = select_encoder(losses, 0.001).to_string();
    std::mt19937_64 gen(12345);
    std::size_t mismatches = 0;
    for (std::size_t s = 0; s < kShuffles; ++s) {
      std::shuffle(losses.begin(), losses.end(), gen);
      mismatches += select_encoder(losses, 0.001).to_string() != reference;
    }
    c.check(mismatches == 0, "select_encoder over " + std::to_string(losses.size()) + " losses, " +
                                 std::to_string(kShuffles) + " shuffles: " + std::to_string(mismatches) +
                                 " mismatches (selected " + reference + ")");
  }
  {
    SweepConfig config;
    config.env.zoo = "prime_cycle";
    config.env.params = {{"p", 3}, {"q", 5}};
    config.variants = {LossVariant::ACState, LossVariant::ACDF, LossVariant::FullMulti, LossVariant::ImpreciseK};
    config.K = {1, 3, 7};
    config.steps = {500, 2000};
    config.trials = 6;
    config.base_seed = 31;
    auto csv = [&](unsigned threads) {
      std::ostringstream os;
      write_rows_csv(os, run_sweep(config, {threads, false}));
      return os.str();
    };
    const std::string one = csv(1), eight = csv(8);
    c.check(one == eight, "sweep CSV at 1 and 8 threads is byte-identical (" + std::to_string(one.size()) + " bytes)");
  }
  return c.passed();
}

bool criterion6() {
  Checker c;
  const std::vector<std::uint64_t> listed = {1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597};
  const auto triangle = oracle::bell_triangle(12);
  for (std::size_t n = 1; n <= 12; ++n) {
    std::uint64_t count = 0;
    for_each_encoder(n, [&](const Encoder&) { ++count; });
    const bool listing_agrees = n > 11 || enumerate_encoders(n).size() == count;
    c.check(listing_agrees && count == listed[n - 1] && count == triangle[n],
            "n=" + std::to_string(n) + ": enumerated " + std::to_string(count) + ", listed " +
                std::to_string(listed[n - 1]) + ", recurrence " + std::to_string(triangle[n]));
  }
  return c.passed();
}

} // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  const unsigned threads = resolve_threads(0);
  const std::vector<std::pair<int, std::function<bool()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, [threads] { return criterion3(threads); }},
      {4, criterion4}, {5, criterion5}, {6, criterion6}};
  bool all = true, any = false;
  for (const auto& [id, run] : criteria) {
    if (which != "all" && which != std::to_string(id)) continue;
    any = true;
    std::cout << "criterion " << id << "\n";
    bool ok = false;
    try {
      ok = run();
    } catch (const std::exception& e) {
      std::cout << "  [FAIL] exception: " << e.what() << "\n";
    }
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "\n";
    all &= ok;
  }
  if (!any) {
    std::cerr << "usage: acceptance <1..6|all>\n";
    return 2;
  }
  return all ? 0 : 1;
}
