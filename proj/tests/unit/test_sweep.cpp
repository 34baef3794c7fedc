#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "exlab/exlab.hpp"

using namespace exlab;

namespace {

SweepConfig small_config() {
  SweepConfig c;
  c.env.zoo = "fig2_chain4";
  c.variants = {LossVariant::ACState, LossVariant::ACDF};
  c.K = {1, 4};
  c.steps = {200, 400};
  c.trials = 3;
  c.base_seed = 17;
  return c;
}

std::string csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_rows_csv(os, rows);
  return os.str();
}

SweepRow row_with(std::optional<OutcomeKind> kind) {
  SweepRow r;
  r.env = "e";
  r.outcome = kind;
  return r;
}

} // namespace

TEST(Sweep, RowCountAndOrder) {
  const SweepConfig c = small_config();
  const auto rows = run_sweep(c, {1, false});
  ASSERT_EQ(rows.size(), c.variants.size() * c.K.size() * c.steps.size() * c.trials);
  std::size_t i = 0;
  for (std::size_t t = 0; t < c.trials; ++t)
    for (LossVariant v : c.variants)
      for (std::size_t k : c.K)
        for (std::size_t s : c.steps) {
          EXPECT_EQ(rows[i].trial, t);
          EXPECT_EQ(rows[i].variant, v);
          EXPECT_EQ(rows[i].K, k);
          EXPECT_EQ(rows[i].steps, s);
          EXPECT_EQ(rows[i].seed, c.trial_seed(t));
          EXPECT_TRUE(rows[i].error.empty()) << rows[i].error;
          ++i;
        }
}

TEST(Sweep, OneTrialOneRowPerCell) {
  SweepConfig c = small_config();
  c.trials = 1;
  EXPECT_EQ(run_sweep(c, {1, false}).size(), c.variants.size() * c.K.size() * c.steps.size());
}

TEST(Sweep, IdenticalAcrossThreadCounts) {
  const SweepConfig c = small_config();
  EXPECT_EQ(csv(run_sweep(c, {1, false})), csv(run_sweep(c, {4, false})));
}

TEST(Sweep, CellsMatchStandaloneLearning) {
  SweepConfig c = small_config();
  c.K = {4};
  c.steps = {400};
  c.trials = 1;
  const auto rows = run_sweep(c, {1, false});
  for (const auto& r : rows) {
    LossConfig lc;
    lc.variant = r.variant;
    lc.K = r.K;
    const auto res = learn(c.env.load(), lc, {1, 400, {}}, r.seed);
    EXPECT_EQ(res.encoder.to_string(), r.encoder);
    EXPECT_EQ(res.loss, r.loss);
  }
}

TEST(Sweep, ShortBudgetBecomesErrorRows) {
  SweepConfig c = small_config();
  c.K = {5};
  c.steps = {6, 400};
  c.trials = 1;
  const auto rows = run_sweep(c, {1, false});
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    if (r.steps == 6) {
      EXPECT_FALSE(r.error.empty());
      EXPECT_FALSE(r.outcome.has_value());
    } else {
      EXPECT_TRUE(r.error.empty());
    }
  }
  EXPECT_NE(csv(rows).find(",Error,"), std::string::npos);
}

TEST(Sweep, ConfigFromJson) {
  const auto j = nlohmann::json::parse(R"({"env":{"zoo":"prime_cycle","params":{"p":3,"q":5}},
    "variants":["ACDF"],"K":[1,2],"steps":[1000],"trials":2,"base_seed":5})");
  const SweepConfig c = SweepConfig::from_json(j);
  EXPECT_EQ(c.env.display_name(), "prime_cycle(p=3;q=5)");
  EXPECT_EQ(c.k_max(), 2u);
  EXPECT_EQ(c.trials, 2u);
}

TEST(Sweep, BadConfigIsSchemaError) {
  for (const char* text : {R"({"variants":["ACDF"]})", R"({"env":{"zoo":"fig2_chain4"},"trials":0})",
                           R"({"env":{"zoo":"fig2_chain4"},"variants":["Nope"]})",
                           R"({"env":{"zoo":"fig2_chain4"},"K":"three"})"}) {
    try {
      SweepConfig::from_json(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SchemaError) << text;
    }
  }
}

TEST(Summary, AllCorrectMinimal) {
  const auto cells = summarize(std::vector<SweepRow>(50, row_with(OutcomeKind::CorrectMinimal)));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_DOUBLE_EQ(cells[0].rate_correct(), 1.0);
  EXPECT_DOUBLE_EQ(cells[0].rate_minimal(), 1.0);
}

TEST(Summary, MixedOutcomes) {
  std::vector<SweepRow> rows(45, row_with(OutcomeKind::CorrectMinimal));
  for (int i = 0; i < 3; ++i) rows.push_back(row_with(OutcomeKind::CorrectNonMinimal));
  for (int i = 0; i < 2; ++i) rows.push_back(row_with(OutcomeKind::Incorrect));
  const auto cells = summarize(rows);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_DOUBLE_EQ(cells[0].rate_correct(), 0.96);
  EXPECT_DOUBLE_EQ(cells[0].rate_minimal(), 0.90);
}

TEST(Summary, EmptyInput) { EXPECT_TRUE(summarize({}).empty()); }

TEST(Output, CsvHeaderAndSvgFiles) {
  SweepConfig c = small_config();
  c.trials = 2;
  const auto rows = run_sweep(c, {1, false});
  EXPECT_EQ(csv(rows).substr(0, csv(rows).find('\n')),
            "env,variant,K,steps,trial,seed,outcome,n_latent,loss,encoder,runtime_ms,error");
  const auto dir = std::filesystem::temp_directory_path() / "exlab_svg_test";
  std::filesystem::remove_all(dir);
  const auto paths = write_svg_plots(summarize(rows), dir.string());
  EXPECT_EQ(paths.size(), 2u);
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p));
  std::filesystem::remove_all(dir);
}
