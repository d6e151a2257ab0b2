#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <vector>

#include "locsk/kernel.hpp"
#include "locsk/lattice.hpp"

using namespace locsk;

TEST(Lattice, EnumerateSitesOneDim) {
  const LatticeBox box(1, 1);
  const auto sites = enumerate_sites(box);
  ASSERT_EQ(sites.size(), 3u);
  EXPECT_EQ(sites[0], Coord{-1});
  EXPECT_EQ(sites[1], Coord{0});
  EXPECT_EQ(sites[2], Coord{1});
  EXPECT_EQ(box.pair_count(), 3u);
}

TEST(Lattice, CountsAndDegenerateBox) {
  EXPECT_EQ(LatticeBox(2, 1).site_count(), 9u);
  EXPECT_EQ(LatticeBox(2, 1).pair_count(), 36u);
  const LatticeBox single(1, 0);
  EXPECT_EQ(enumerate_sites(single), std::vector<Coord>{Coord{0}});
  EXPECT_EQ(single.pair_count(), 0u);
}

TEST(Lattice, SiteIndexIsBijectiveAndLexicographic) {
  const LatticeBox box(3, 2);
  const auto sites = enumerate_sites(box);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    EXPECT_EQ(box.index(sites[s]), s);
    if (s > 0) EXPECT_LT(sites[s - 1], sites[s]);
  }
}

TEST(Lattice, PairIndexMatchesIterationOrder) {
  const LatticeBox box(2, 1);
  std::size_t p = 0;
  for (std::size_t a = 0; a < box.site_count(); ++a)
    for (std::size_t b = a + 1; b < box.site_count(); ++b, ++p) {
      EXPECT_EQ(box.pair_index(a, b), p);
      EXPECT_EQ(box.pair_index(b, a), p);
    }
  EXPECT_EQ(p, box.pair_count());
}

TEST(StructureSum, FivePointPhaseSum) {
  // e^{i pi j / 2}, j = -2..2: -1, -i, 1, i, -1
  const auto s = structure_sum(LatticeBox(1, 2), {1});
  EXPECT_NEAR(s.real(), -0.2, 1e-15);
  EXPECT_NEAR(s.imag(), 0.0, 1e-15);
}

TEST(StructureSum, ZeroModeIsOne) {
  EXPECT_EQ(structure_sum(LatticeBox(2, 3), {0, 0}), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(structure_sum(LatticeBox(1, 0), {0}), std::complex<double>(1.0, 0.0));
}

TEST(StructureSum, TwoDimensionalProduct) {
  const LatticeBox box(2, 1);
  EXPECT_NEAR(structure_sum(box, {1, 1}).real(), 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(structure_sum_closed_form(box, {1, 1}), 1.0 / 9.0);
}

TEST(StructureSum, RejectsNonzeroModeOnSingleSite) {
  EXPECT_THROW(structure_sum(LatticeBox(1, 0), {1}), ValidationError);
  EXPECT_THROW(structure_sum_closed_form(LatticeBox(1, 0), {1}), ValidationError);
}

TEST(StructureSum, ClosedFormAndBoundExhaustive) {
  for (int d = 1; d <= 2; ++d) {
    for (int N = 1; N <= 8; ++N) {
      const LatticeBox box(d, N);
      std::vector<Coord> ks;
      if (d == 1) {
        for (int a = -4; a <= 4; ++a) ks.push_back({a});
      } else {
        for (int a = -4; a <= 4; ++a)
          for (int b = -4; b <= 4; ++b) ks.push_back({a, b});
      }
      for (const auto& k : ks) {
        const auto direct = structure_sum(box, k);
        const double closed = structure_sum_closed_form(box, k);
        EXPECT_NEAR(direct.real(), closed, 1e-12) << "d=" << d << " N=" << N;
        EXPECT_NEAR(direct.imag(), 0.0, 1e-12);
        bool aliased = false;
        for (int kl : k) aliased |= (kl != 0 && kl % (2 * N) == 0);
        if (aliased)
          EXPECT_GT(std::abs(closed), std::pow(box.side(), -nonzero_count(k)));
        else
          EXPECT_LE(std::abs(closed), std::pow(box.side(), -nonzero_count(k)) * (1 + 1e-15));
      }
    }
  }
}

TEST(KernelSpec, DerivedQuantities) {
  const auto k = default_kernel(1);
  EXPECT_DOUBLE_EQ(k.gamma0(), 1.0);
  EXPECT_DOUBLE_EQ(k.Gamma(), 2.0);
  EXPECT_NEAR(k.q2({0.0}), 2.0, 1e-15);
  EXPECT_NEAR(k.q2({1.0}), 0.0, 1e-15);
}

TEST(KernelSpec, RejectsBadModes) {
  EXPECT_THROW(KernelSpec(1, {{{-1}, 0.5}}), ValidationError);                // not canonical
  EXPECT_THROW(KernelSpec(1, {{{1}, 0.1}, {{1}, 0.1}}), ValidationError);     // duplicate
  EXPECT_THROW(KernelSpec(1, {{{0}, 1.0}, {{1}, -0.1}}), NotPositiveType);   // negative gamma
  EXPECT_THROW(KernelSpec(2, {{{1}, 0.1}}), ValidationError);                 // wrong dim
  // nonnegative coefficients but q^2(1) = 1 - 2 * 1 < 0
  EXPECT_THROW(KernelSpec(1, {{{0}, 0.0}, {{1}, 1.0}}), NotPositiveType);
  EXPECT_THROW(KernelSpec(1, {{{0}, 1.0}, {{1}, 1.0}}), NotPositiveType);
}

TEST(KernelSpec, CanonicalForm) {
  EXPECT_TRUE(is_canonical({0, 0}));
  EXPECT_TRUE(is_canonical({0, 2}));
  EXPECT_TRUE(is_canonical({1, -3}));
  EXPECT_FALSE(is_canonical({0, -1}));
  EXPECT_FALSE(is_canonical({-1, 5}));
  EXPECT_EQ(canonicalize({-1, 5}), (Coord{1, -5}));
}

TEST(KernelFit, ConstantFunction) {
  const auto fit = fit_from_function(1, [](std::span<const double>) { return 1.0; }, 16, 2);
  ASSERT_EQ(fit.spec.modes().size(), 1u);
  EXPECT_NEAR(fit.spec.gamma0(), 1.0, 1e-14);
  EXPECT_NEAR(fit.spec.Gamma(), 1.0, 1e-14);
}

TEST(KernelFit, SingleCosine) {
  const auto fit = fit_from_function(
      1, [](std::span<const double> x) { return 1.0 + std::cos(std::numbers::pi * x[0]); }, 64, 8);
  ASSERT_EQ(fit.spec.modes().size(), 2u);
  EXPECT_NEAR(fit.spec.gamma0(), 1.0, 1e-12);
  EXPECT_EQ(fit.spec.modes()[1].k, Coord{1});
  EXPECT_NEAR(fit.spec.modes()[1].gamma, 0.5, 1e-12);
  EXPECT_NEAR(fit.spec.Gamma(), 2.0, 1e-12);
  EXPECT_LT(fit.residual, 1e-12);
}

TEST(KernelFit, ParabolaIsNotPositiveType) {
  EXPECT_THROW(fit_from_function(1, [](std::span<const double> x) { return x[0] * x[0]; }, 64, 4),
               NotPositiveType);
}

TEST(KernelFit, TruncationResidualReported) {
  // exp(cos(pi x)) has all coefficients positive (modified Bessel); a low
  // cutoff leaves a visible residual
  auto f = [](std::span<const double> x) { return std::exp(std::cos(std::numbers::pi * x[0])); };
  EXPECT_THROW(fit_from_function(1, f, 64, 1, 1e-6), TruncationError);
  const auto fit = fit_from_function(1, f, 64, 12, 1e-10);
  EXPECT_LT(fit.residual, 1e-10);
}

TEST(KernelFit, ReconstructionMatchesGridTwoDim) {
  auto f = [](std::span<const double> x) {
    return 1.0 + 0.5 * std::cos(std::numbers::pi * (x[0] + x[1])) + 0.25 * std::cos(std::numbers::pi * (2 * x[0] - x[1]));
  };
  const auto fit = fit_from_function(2, f, 16, 3);
  std::vector<double> x(2);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      x = {-1.0 + a / 8.0, -1.0 + b / 8.0};
      EXPECT_NEAR(fit.spec.q2(x), f(x), fit.residual + 1e-15);
    }
  EXPECT_NEAR(fit.spec.Gamma(), 1.75, 1e-12);
}

TEST(KernelFit, RejectsCoarseGrid) {
  std::vector<double> v(8, 1.0);
  EXPECT_THROW(fit_from_grid(1, v, 8, 3), ValidationError);
}

TEST(Hypothesis2, Examples) {
  auto h1 = check_hypothesis2(default_kernel(1));
  EXPECT_EQ(h1.max_valid_dhat, 1);
  EXPECT_TRUE(h1.satisfied);

  auto h2 = check_hypothesis2(KernelSpec(2, {{{0, 0}, 1.0}, {{1, 0}, 0.25}}));
  EXPECT_EQ(h2.max_valid_dhat, 1);
  EXPECT_FALSE(h2.satisfied);

  auto h3 = check_hypothesis2(KernelSpec(2, {{{0, 0}, 1.0}, {{1, 1}, 0.25}, {{2, 2}, 0.1}}));
  EXPECT_EQ(h3.max_valid_dhat, 2);
  EXPECT_TRUE(h3.satisfied);

  // no active nonzero mode: d-hat = d
  auto h4 = check_hypothesis2(KernelSpec(3, {{{0, 0, 0}, 1.0}}));
  EXPECT_EQ(h4.max_valid_dhat, 3);
  EXPECT_TRUE(h4.satisfied);
}

TEST(EvaluateQN, Examples) {
  const auto k = default_kernel(1);
  const LatticeBox box1(1, 1);
  EXPECT_NEAR(evaluate_qN(k, box1, {0}), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(evaluate_qN(k, box1, {1}), 0.0, 1e-7);  // sqrt of round-off
  EXPECT_NEAR(evaluate_qN(k, LatticeBox(1, 2), {1}), 1.0, 1e-15);
  EXPECT_THROW(evaluate_qN(k, LatticeBox(1, 0), {0}), ValidationError);
}

TEST(KernelFile, RoundTripIsBitExact) {
  const auto fit = fit_from_function(
      2, [](std::span<const double> x) {
        return 1.3 + 0.2 * std::cos(std::numbers::pi * (x[0] - x[1])) + 0.1 * std::cos(std::numbers::pi * 3 * x[1]);
      },
      16, 3);
  const auto path = std::filesystem::temp_directory_path() / "locsk_kernel_roundtrip.json";
  save_kernel(fit.spec, path.string());
  const auto back = load_kernel(path.string());
  ASSERT_EQ(back.modes().size(), fit.spec.modes().size());
  for (std::size_t i = 0; i < back.modes().size(); ++i) {
    EXPECT_EQ(back.modes()[i].k, fit.spec.modes()[i].k);
    EXPECT_EQ(back.modes()[i].gamma, fit.spec.modes()[i].gamma);  // bitwise
  }
  EXPECT_EQ(to_json(back).dump(), to_json(fit.spec).dump());
  std::filesystem::remove(path);
}

TEST(KernelFile, LoaderRejectsMalformed) {
  using nlohmann::json;
  EXPECT_THROW(kernel_from_json(json::parse(R"({"d":1,"modes":[{"k":[-1],"gamma":0.5}]})")), ValidationError);
  EXPECT_THROW(kernel_from_json(json::parse(R"({"d":1,"modes":[{"k":[0],"gamma":1},{"k":[0],"gamma":1}]})")),
               ValidationError);
  EXPECT_THROW(kernel_from_json(json::parse(R"({"d":1})")), ValidationError);
  EXPECT_THROW(kernel_from_json(json::parse(R"({"d":1,"modes":[{"k":"x","gamma":1}]})")), ValidationError);
  EXPECT_THROW(load_kernel("/nonexistent/kernel.json"), ValidationError);
}
