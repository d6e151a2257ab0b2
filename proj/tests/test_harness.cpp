#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "locsk/harness.hpp"
#include "locsk/parallel.hpp"
#include "locsk/stats.hpp"

using namespace locsk;

TEST(Summarize, TwoPoints) {
  const std::vector<double> xs{-1.0, 1.0};
  const auto s = summarize(xs);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.variance, 2.0);
  EXPECT_FALSE(s.degenerate);
}

TEST(Summarize, ConstantSampleIsDegenerate) {
  const std::vector<double> xs(10, 3.5);
  const auto s = summarize(xs);
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_EQ(s.ks_distance, 1.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(Summarize, TooFewSamples) {
  EXPECT_THROW(summarize(std::vector<double>{1.0}), Degenerate);
  EXPECT_THROW(summarize(std::vector<double>{}), Degenerate);
}

TEST(Summarize, NormalSelfTest) {
  Rng rng(2024);
  std::vector<double> xs(100'000);
  for (double& x : xs) x = rng.normal();
  const auto s = summarize(xs);
  EXPECT_LT(s.ks_distance, 0.01);
  EXPECT_LT(std::abs(s.skewness), 0.03);
  EXPECT_LT(std::abs(s.excess_kurtosis), 0.1);
  EXPECT_GE(s.ks_distance, 0.0);
}

TEST(Summarize, KsDetectsNonNormal) {
  Rng rng(1);
  std::vector<double> xs(10'000);
  for (double& x : xs) x = rng.uniform();
  EXPECT_GT(summarize(xs).ks_distance, 0.05);
}

TEST(LogLogSlope, PowerLaw) {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 1.5, 0.75, 0.375};
  EXPECT_NEAR(loglog_slope(x, y), -1.0, 1e-14);
  EXPECT_TRUE(std::isnan(loglog_slope(std::vector<double>{1}, std::vector<double>{1})));
}

TEST(ParallelMap, OrderAndExceptions) {
  const auto v = parallel_map(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(50, 3,
                            [](std::size_t i) -> int {
                              if (i == 17) throw NumericalError("boom");
                              return 0;
                            }),
               NumericalError);
}

TEST(SeedDerivation, StableAndDistinct) {
  EXPECT_EQ(derive_seed(1, "a", 0), derive_seed(1, "a", 0));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "b", 0));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(2, "a", 0));
  static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
  static_assert(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

namespace {
ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.beta = 0.2;
  c.h = 0.3;
  c.box_n = {1, 2};
  c.samples = 50;
  c.seed = 17;
  c.mcmc_samples = 4;
  c.sweeps = 400;
  c.burn_in = 50;
  c.paths = 20;
  c.grid = 5;
  return c;
}
}  // namespace

TEST(Harness, ZeroBetaConvergenceIsExact) {
  auto c = small(ExperimentKind::Convergence);
  c.beta = 0.0;
  c.box_n = {1, 2, 3};
  const auto res = run_convergence_experiment(c);
  for (const auto& row : res.rows) EXPECT_LE(row.abs_error, 1e-12);
}

TEST(Harness, ZeroBetaCltIsDegenerate) {
  auto c = small(ExperimentKind::Clt);
  c.beta = 0.0;
  c.box_n = {2};
  const auto res = run_clt_experiment(c);
  for (double y : res.y) EXPECT_NEAR(y, 0.0, 1e-12);
  EXPECT_LE(res.stats.variance, 1e-24);
  EXPECT_EQ(res.analytic.tau, 0.0);
}

TEST(Harness, ZeroBetaOverlapDecayMatchesIndependenceFormula) {
  auto c = small(ExperimentKind::OverlapDecay);
  c.beta = 0.0;
  c.box_n = {1, 3};
  const auto res = run_overlap_decay_experiment(c);
  const double m = std::tanh(c.h), m4 = std::pow(m, 4);
  EXPECT_NEAR(res.r, m * m, 1e-15);
  for (const auto& row : res.rows) {
    const double n = 2 * row.N + 1;
    // gamma_0 (1 - m^4)/n + 2 * 0.5 * ((1 - m^4)/n + m^4 / n^2)
    EXPECT_NEAR(row.weighted, (1 - m4) / n + (1 - m4) / n + m4 / (n * n), 1e-13);
    EXPECT_EQ(row.method, "exact");
  }
}

TEST(Harness, ZeroBetaOverlapDecayMcmcPath) {
  auto c = small(ExperimentKind::OverlapDecay);
  c.beta = 0.0;
  c.box_n = {7};  // 15 sites: beyond exact enumeration
  c.mcmc_samples = 8;
  c.sweeps = 4000;
  const auto res = run_overlap_decay_experiment(c);
  ASSERT_EQ(res.rows.front().method, "mcmc");
  const double m4 = std::pow(std::tanh(c.h), 4), n = 15.0;
  const double expected = 2 * (1 - m4) / n + m4 / (n * n);
  EXPECT_LT(std::abs(res.rows.front().weighted - expected), 4 * res.rows.front().se);
}

TEST(Harness, OutputsAreDeterministicAndWorkerInvariant) {
  for (auto kind : {ExperimentKind::Convergence, ExperimentKind::Clt, ExperimentKind::OverlapDecay,
                    ExperimentKind::DerivativeCheck, ExperimentKind::InterpCheck}) {
    auto c = small(kind);
    if (kind == ExperimentKind::DerivativeCheck) c.samples = 1000;
    if (kind == ExperimentKind::OverlapDecay) c.box_n = {1, 7};
    const auto base = run_experiment(c, "csv");
    EXPECT_EQ(base, run_experiment(c, "csv"));
    for (int w : {4, 8}) {
      c.workers = w;
      EXPECT_EQ(base, run_experiment(c, "csv")) << to_string(kind) << " workers=" << w;
    }
    c.workers = 1;
    EXPECT_EQ(run_experiment(c, "json"), run_experiment(c, "json"));
  }
}

TEST(Harness, RecordsCarryHashAndSeed) {
  auto c = small(ExperimentKind::Convergence);
  const std::string hash = config_hash(c);
  const auto csv = run_experiment(c, "csv");
  std::size_t lines = 0;
  for (std::size_t pos = csv.find('\n') + 1; pos < csv.size(); pos = csv.find('\n', pos) + 1) {
    const auto line = csv.substr(pos, csv.find('\n', pos) - pos);
    EXPECT_NE(line.find("," + hash + ",17"), std::string::npos) << line;
    ++lines;
  }
  EXPECT_EQ(lines, c.box_n.size());
  const auto j = nlohmann::json::parse(run_experiment(c, "json"));
  for (const auto& row : j.at("rows")) {
    EXPECT_EQ(row.at("config_hash"), hash);
    EXPECT_EQ(row.at("seed"), 17);
  }
}

TEST(Harness, HashIgnoresWorkersButNotParameters) {
  auto c = small(ExperimentKind::Clt);
  const auto h = config_hash(c);
  c.workers = 8;
  EXPECT_EQ(config_hash(c), h);
  c.beta = 0.21;
  EXPECT_NE(config_hash(c), h);
}

TEST(Harness, ConfigJsonRoundTrip) {
  auto c = small(ExperimentKind::OverlapDecay);
  c.kernel = KernelSpec(1, {{{0}, 1.2}, {{2}, 0.3}});
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Harness, Validation) {
  auto c = small(ExperimentKind::Convergence);
  c.beta = 0.5;
  EXPECT_THROW(run_convergence_experiment(c), ValidationError);
  c.allow_high_beta = true;
  EXPECT_NO_THROW(run_convergence_experiment(c));
  c.box_n = {12};
  EXPECT_THROW(run_convergence_experiment(c), TooLarge);
  c.box_n = {};
  EXPECT_THROW(run_convergence_experiment(c), ValidationError);
  EXPECT_THROW(parse_kind("nope"), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"beta", "x"}}), ValidationError);
}
