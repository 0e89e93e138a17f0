#include <gtest/gtest.h>

#include <random>

#include "hetsched/instances.hpp"
#include "hetsched/model.hpp"

using namespace hetsched;

namespace {

const AffinityMatrix kMu{{20.0, 15.0}, {3.0, 8.0}};

// Throughput of a 2x2 state, written out term by term.
double two_type(double m11, double m12, double m21, double m22, long a, long b, long n1, long n2) {
  const double c1 = static_cast<double>(a + (n2 - b));
  const double c2 = static_cast<double>(b + (n1 - a));
  double x = 0.0;
  if (c1 > 0) x += (m11 * a + m21 * (n2 - b)) / c1;
  if (c2 > 0) x += (m12 * (n1 - a) + m22 * b) / c2;
  return x;
}

}  // namespace

TEST(AffinityMatrix, RejectsNonPositiveAndNonFinite) {
  EXPECT_THROW((AffinityMatrix{{1.0, 0.0}}), Error);
  EXPECT_THROW((AffinityMatrix{{1.0, -2.0}}), Error);
  EXPECT_THROW((AffinityMatrix{{1.0, std::numeric_limits<double>::infinity()}}), Error);
  EXPECT_THROW(AffinityMatrix::from_rows({{1.0, 2.0}, {3.0}}), Error);
}

TEST(AffinityMatrix, TwoTypeAffinityCondition) {
  EXPECT_TRUE(kMu.is_two_type_affinity());
  EXPECT_FALSE((AffinityMatrix{{5.0, 5.0}, {5.0, 5.0}}.is_two_type_affinity()));
  EXPECT_FALSE((AffinityMatrix{{1.0, 2.0}, {3.0, 8.0}}.is_two_type_affinity()));
}

TEST(AssignmentMatrix, RowAndColumnTotals) {
  const AssignmentMatrix n{{2, 5}, {3, 0}};
  EXPECT_EQ(n.row_total(0), 7);
  EXPECT_EQ(n.row_total(1), 3);
  EXPECT_EQ(n.column_total(0), 5);
  EXPECT_EQ(n.column_total(1), 5);
  EXPECT_EQ(n.total(), 10);
  EXPECT_THROW((AssignmentMatrix{{1, -1}}), Error);
  EXPECT_THROW(n.with_removed(1, 1), Error);
}

TEST(AssignmentMatrix, MovePreservesRowTotals) {
  AssignmentMatrix n{{2, 5}, {3, 0}};
  n.move_task(0, 1, 0);
  EXPECT_EQ(n, (AssignmentMatrix{{3, 4}, {3, 0}}));
  EXPECT_EQ(n.row_total(0), 7);
  EXPECT_THROW(n.move_task(1, 1, 0), Error);
}

TEST(SystemState2, ExpandsToAssignment) {
  EXPECT_EQ(to_assignment({1, 10}, 10, 10), (AssignmentMatrix{{1, 9}, {0, 10}}));
  EXPECT_EQ(to_state2(AssignmentMatrix{{1, 9}, {0, 10}}), (SystemState2{1, 10}));
  EXPECT_THROW(to_assignment({11, 0}, 10, 10), Error);
  EXPECT_THROW(to_assignment({0, -1}, 10, 10), Error);
}

TEST(TimeSharedRate, Examples) {
  EXPECT_DOUBLE_EQ(time_shared_rate(kMu, AssignmentMatrix{{1, 0}, {0, 1}}, 0, 0), 20.0);
  const AssignmentMatrix n{{2, 0}, {3, 1}};
  EXPECT_DOUBLE_EQ(time_shared_rate(kMu, n, 0, 0), 4.0);
  EXPECT_DOUBLE_EQ(time_shared_rate(kMu, n, 1, 0), 0.6);
  // Per-type completion rates on the column add up to the column throughput.
  const double sum = time_shared_rate(kMu, n, 0, 0) * 2 + time_shared_rate(kMu, n, 1, 0) * 3;
  EXPECT_NEAR(sum, column_throughput(kMu, n, 0), 1e-12);
}

TEST(TimeSharedRate, EmptyColumnIsAnError) {
  try {
    time_shared_rate(kMu, AssignmentMatrix{{2, 0}, {3, 0}}, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no tasks on processor"), std::string::npos);
  }
}

TEST(ThroughputState, Examples) {
  EXPECT_DOUBLE_EQ(throughput_state(kMu, AssignmentMatrix{{10, 0}, {0, 10}}), 28.0);
  EXPECT_NEAR(throughput_state(kMu, AssignmentMatrix{{1, 9}, {0, 10}}), 31.3158, 5e-5);
  EXPECT_NEAR(throughput_state(kMu, AssignmentMatrix{{1, 9}, {0, 10}}), 20.0 + 215.0 / 19.0, 1e-12);
  EXPECT_DOUBLE_EQ(throughput_state(AffinityMatrix{{5.0, 5.0}, {5.0, 5.0}},
                                    AssignmentMatrix{{3, 7}, {6, 4}}),
                   10.0);
  EXPECT_THROW(throughput_state(kMu, AssignmentMatrix{{1, 2, 3}}), Error);
}

TEST(ThroughputState2, Examples) {
  EXPECT_DOUBLE_EQ(throughput_state2(kMu, {10, 10}, 10, 10), 28.0);
  EXPECT_NEAR(throughput_state2(kMu, {1, 10}, 10, 10), 31.3158, 5e-5);
  EXPECT_DOUBLE_EQ(throughput_state2(kMu, {0, 0}, 10, 10), 18.0);
  EXPECT_THROW(throughput_state2(kMu, {0, 11}, 10, 10), Error);
}

TEST(ThroughputState2, MatchesTermByTermFormulaOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto mu = instances::random_affinity(rng, 2, 2);
    const auto n = instances::random_row_totals(rng, 2, 0, 8);
    for (long a = 0; a <= n[0]; ++a)
      for (long b = 0; b <= n[1]; ++b) {
        if (n[0] + n[1] == 0) continue;
        const double want = two_type(mu(0, 0), mu(0, 1), mu(1, 0), mu(1, 1), a, b, n[0], n[1]);
        EXPECT_NEAR(throughput_state2(mu, {a, b}, n[0], n[1]), want, 1e-9 * want);
      }
  }
}

TEST(ThroughputState, BoundsAndScaleCovariance) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  std::uniform_int_distribution<long> cnt(0, 4);
  for (int t = 0; t < 500; ++t) {
    const auto k = dim(rng), l = dim(rng);
    const auto mu = instances::random_affinity(rng, k, l);
    Grid<long> g(k, l);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < l; ++j) g(i, j) = cnt(rng);
    g(0, 0) += 1;
    const AssignmentMatrix n(std::move(g));
    const double x = throughput_state(mu, n);
    double bound = 0.0;
    for (std::size_t j = 0; j < l; ++j) bound += mu(mu.column_argmax(j), j);
    EXPECT_GT(x, 0.0);
    EXPECT_LE(x, bound * (1 + 1e-12));
    EXPECT_NEAR(throughput_state(mu.scaled(3.5), n), 3.5 * x, 1e-9 * x);
  }
}

TEST(PowerMatrix, Examples) {
  const auto ones = power_matrix(kMu, {1.0, 0.0});
  for (double v : ones.values()) EXPECT_DOUBLE_EQ(v, 1.0);
  const AffinityMatrix eight{{8.0}};
  EXPECT_DOUBLE_EQ(power_matrix(eight, {2.0, 1.0})(0, 0), 16.0);
  const AffinityMatrix sixteen{{16.0}};
  EXPECT_DOUBLE_EQ(power_matrix(sixteen, {1.0, 0.5})(0, 0), 4.0);
  EXPECT_THROW(power_matrix(kMu, {0.0, 1.0}), Error);
  EXPECT_THROW(power_matrix(kMu, {1.0, 1.5}), Error);
}

TEST(ExpectedEnergy, Reductions) {
  const AssignmentMatrix bf{{10, 0}, {0, 10}};
  EXPECT_NEAR(expected_energy(kMu, bf, {1.0, 1.0}), 1.0, 1e-12);
  EXPECT_NEAR(expected_energy(kMu, bf, {1.0, 0.0}), 2.0 / 28.0, 1e-12);
  const double mid = expected_energy(kMu, bf, {1.0, 0.5});
  EXPECT_GT(mid, 2.0 / 28.0);
  EXPECT_LT(mid, 1.0);
  // One nonempty column: alpha = 0 gives k / X.
  const AssignmentMatrix one_col{{10, 0}, {10, 0}};
  EXPECT_NEAR(expected_energy(kMu, one_col, {1.0, 0.0}),
              1.0 / throughput_state(kMu, one_col), 1e-12);
  EXPECT_NEAR(expected_energy(kMu, one_col, {1.0, 1.0}), 1.0, 1e-12);
}

TEST(ExpectedEnergy, SandwichedBetweenConstantAndProportionalPower) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const auto mu = instances::random_affinity(rng, 2, 2, {0.5, 50.0});
    const auto n = instances::random_row_totals(rng, 2, 1, 10);
    const auto s = to_assignment({n[0] / 2, n[1] / 2}, n[0], n[1]);
    const double e0 = expected_energy(mu, s, {1.0, 0.0});
    const double e1 = expected_energy(mu, s, {1.0, 1.0});
    const double lo = std::min(e0, e1), hi = std::max(e0, e1);
    for (double a : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      const double e = expected_energy(mu, s, {1.0, a});
      EXPECT_GE(e, lo * (1 - 1e-12));
      EXPECT_LE(e, hi * (1 + 1e-12));
    }
  }
}

TEST(Edp, Examples) {
  const AssignmentMatrix bf{{10, 0}, {0, 10}};
  EXPECT_NEAR(edp(kMu, bf, {1.0, 1.0}, 20), 20.0 / 28.0, 1e-12);
  EXPECT_NEAR(edp(kMu, bf, {1.0, 0.0}, 20), 40.0 / 784.0, 1e-12);
  const double mid = edp(kMu, bf, {1.0, 0.5}, 20);
  EXPECT_GT(mid, 40.0 / 784.0);
  EXPECT_LT(mid, 20.0 / 28.0);
}
