#include <gtest/gtest.h>

#include "support.hpp"
#include "turbine_lq/loads.hpp"

using namespace turbine_lq;
using testing_support::Rng;

namespace {

CycleSet count(std::vector<double> x) { return rainflow(x); }

}  // namespace

TEST(Rainflow, TurningPoints) {
  const std::vector<double> x{0, 1, 2, 2, 1, 0, 0, 3};
  EXPECT_EQ(turning_points(x), (std::vector<double>{0, 2, 0, 3}));
  EXPECT_TRUE(turning_points(std::vector<double>{}).empty());
}

TEST(Rainflow, SingleExcursionIsTwoHalfCycles) {
  const CycleSet c = count({0, 4, 0});
  ASSERT_EQ(c.cycles.size(), 2u);
  for (const auto& cy : c.cycles) {
    EXPECT_EQ(cy.range, 4.0);
    EXPECT_EQ(cy.mean, 2.0);
    EXPECT_EQ(cy.count, 0.5);
  }
  EXPECT_EQ(c.total_count(), 1.0);
}

TEST(Rainflow, RepeatedExcursionClosesOneCycle) {
  const CycleSet c = count({0, 4, 0, 4, 0});
  ASSERT_EQ(c.cycles.size(), 3u);
  EXPECT_EQ(c.cycles[0].count, 1.0);
  EXPECT_EQ(c.cycles[0].range, 4.0);
  EXPECT_EQ(c.total_count(), 2.0);
  EXPECT_EQ(c.residual, (std::vector<double>{0, 4, 0}));
}

TEST(Rainflow, TextbookSequence) {
  // Hand trace of the four-point stack: only (5, -1, 3, -4) closes, with
  // inner range |3 - (-1)| = 4 bounded by 6 and 7. Every other window has an
  // inner range larger than one of its outer ranges.
  const CycleSet c = count({-2, 1, -3, 5, -1, 3, -4, 4, -2});
  ASSERT_GE(c.cycles.size(), 1u);
  EXPECT_EQ(c.cycles[0].range, 4.0);
  EXPECT_EQ(c.cycles[0].mean, 1.0);
  EXPECT_EQ(c.cycles[0].count, 1.0);
  EXPECT_EQ(c.residual, (std::vector<double>{-2, 1, -3, 5, -4, 4, -2}));
  EXPECT_EQ(c.total_count(), 1.0 + 0.5 * 6);
}

TEST(RainflowProperty, ReversalsAreConservedAndRangesBounded) {
  Rng rng(71);
  for (int i = 0; i < 1000; ++i) {
    const auto x = testing_support::random_walk(rng, rng.integer(2, 400));
    const CycleSet c = rainflow(x);
    const auto tp = turning_points(x);
    double full = 0.0;
    for (const auto& cy : c.cycles) full += cy.count == 1.0 ? 1.0 : 0.0;
    // Each closed cycle removes two turning points, each half cycle spans one
    // reversal of the residual.
    ASSERT_EQ(2.0 * full + static_cast<double>(c.residual.size()), static_cast<double>(tp.size()))
        << "case " << i;
    ASSERT_EQ(2.0 * c.total_count(), static_cast<double>(tp.size() - 1)) << "case " << i;
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    double biggest = 0.0;
    for (const auto& cy : c.cycles) {
      ASSERT_LE(cy.range, hi - lo) << "case " << i;
      ASSERT_TRUE(cy.mean >= lo && cy.mean <= hi) << "case " << i;
      biggest = std::max(biggest, cy.range);
    }
    if (tp.size() > 1) {
      ASSERT_EQ(biggest, hi - lo) << "case " << i;
    }
    // Mirroring the signal keeps every range.
    std::vector<double> neg(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
    const CycleSet cn = rainflow(neg);
    ASSERT_EQ(cn.cycles.size(), c.cycles.size()) << "case " << i;
    for (std::size_t k = 0; k < c.cycles.size(); ++k) {
      ASSERT_EQ(cn.cycles[k].range, c.cycles[k].range) << "case " << i;
      ASSERT_EQ(cn.cycles[k].count, c.cycles[k].count) << "case " << i;
    }
  }
}

TEST(Del, HandComputedValue) {
  // One full cycle of 4 and two halves of 4: (1 * 4^4 + 2 * 0.5 * 4^4)^(1/4)
  const CycleSet c = count({0, 4, 0, 4, 0});
  EXPECT_NEAR(damage_equivalent_load(c, {4.0, 1.0}), std::pow(2.0 * 256.0, 0.25), 1e-12);
  EXPECT_NEAR(damage_equivalent_load(c, {4.0, 2.0}), 4.0, 1e-12);
  EXPECT_EQ(damage_equivalent_load(count({3.0}), {4.0, 1.0}), 0.0);
  EXPECT_THROW((void)damage_equivalent_load(c, {0.5, 1.0}), ConfigError);
  EXPECT_THROW((void)damage_equivalent_load(c, {4.0, 0.0}), ConfigError);
}

TEST(DelProperty, HomogeneousAndShiftInvariant) {
  Rng rng(72);
  for (int i = 0; i < 1000; ++i) {
    const auto x = testing_support::random_walk(rng, rng.integer(3, 300));
    const double a = rng.uniform(0.01, 100.0);
    const double b = rng.uniform(-1e3, 1e3);
    std::vector<double> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = a * x[k] + b;
    const DelConfig cfg{rng.uniform(1.0, 12.0), rng.uniform(1.0, 600.0)};
    const double dx = damage_equivalent_load(rainflow(x), cfg);
    const double dy = damage_equivalent_load(rainflow(y), cfg);
    ASSERT_NEAR(dy, a * dx, 1e-9 * a * dx + 1e-12) << "case " << i;
    // More reference cycles lowers the equivalent amplitude by N^(1/m).
    const DelConfig twice{cfg.woehler_exponent, 2.0 * cfg.reference_cycles};
    ASSERT_NEAR(damage_equivalent_load(rainflow(x), twice) * std::pow(2.0, 1.0 / cfg.woehler_exponent),
                dx, 1e-9 * dx + 1e-12)
        << "case " << i;
  }
}

TEST(Rainflow, CyclesCsv) {
  const std::string text = cycles_csv(count({0, 4, 0}));
  EXPECT_EQ(text, "range,mean,count\n4,2,0.5\n4,2,0.5\n");
}
