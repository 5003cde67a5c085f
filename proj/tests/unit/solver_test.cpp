// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "jtload/errors.hpp"
#include "jtload/solver.hpp"
#include "random_instances.hpp"

namespace jtload {
namespace {

NetworkScenario symmetric_pair(double demand) {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.1, 0.1, 1.0;
  return {{{1.0, CellKind::Macro, {}}, {1.0, CellKind::Macro, {}}},
          {{demand, {}}, {demand, {}}},
          g,
          0.1,
          1.0,
          1};
}

// Scalar form of the symmetric pair: x -> d / log2(1 + 1 / (0.1 x + 0.1)).
double scalar_map(double x, double d) { return d / std::log2(1.0 + 1.0 / (0.1 * x + 0.1)); }

double bisect_fixed_point(double d) {
  double lo = 0.0;
  double hi = 1.0;
  while (scalar_map(hi, d) > hi) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (scalar_map(mid, d) > mid ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(FixedPoint, SingleCellConvergesImmediately) {
  Eigen::MatrixXd g(1, 1);
  g << 1.0;
  const NetworkScenario s({{1.0, CellKind::Macro, {}}}, {{0.5, {}}}, g, 1.0, 1.0, 1);
  const auto r = fixed_point_solve(s, JtPattern::single({0}, 1));
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1);
  EXPECT_DOUBLE_EQ(r.load[0], 0.5);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(FixedPoint, SymmetricPairMatchesBisection) {
  const auto r = fixed_point_solve(symmetric_pair(0.5), JtPattern::single({0, 1}, 2));
  ASSERT_TRUE(r.converged());
  const double oracle = bisect_fixed_point(0.5);
  EXPECT_NEAR(oracle, 0.15270443938088923, 1e-15);
  EXPECT_NEAR(r.load[0], oracle, 1e-8);
  EXPECT_NEAR(r.load[1], oracle, 1e-8);
  EXPECT_EQ(r.load[0], r.load[1]);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_FALSE(r.capacity_violated);
}

TEST(FixedPoint, OverloadedPairDiverges) {
  const double d = 20.0;
  // Oracle: the scalar map stays above the diagonal up to the ceiling.
  for (double x = 0.0; x <= 1e6; x = x < 1.0 ? x + 0.01 : x * 1.01) ASSERT_GT(scalar_map(x, d), x);

  const auto s = symmetric_pair(d);
  const auto p = JtPattern::single({0, 1}, 2);
  const auto r = fixed_point_solve(s, p);
  EXPECT_TRUE(r.status == SolveStatus::Diverged || r.status == SolveStatus::IterationCapReached);
  EXPECT_TRUE(r.capacity_violated);

  LoadVector x = LoadVector::Zero(2);
  for (int k = 0; k < 50; ++k) {
    const LoadVector next = coupled_map(s, p, x);
    EXPECT_TRUE((next.array() > x.array()).all());
    x = next;
  }
}

TEST(FixedPoint, IterationCapReported) {
  SolverConfig cfg;
  cfg.max_iterations = 3;
  const auto r = fixed_point_solve(symmetric_pair(0.5), JtPattern::single({0, 1}, 2), cfg);
  EXPECT_EQ(r.status, SolveStatus::IterationCapReached);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.residual, cfg.tolerance);
}

TEST(FixedPoint, CapacityViolationFlag) {
  const auto r = fixed_point_solve(symmetric_pair(4.0), JtPattern::single({0, 1}, 2));
  ASSERT_TRUE(r.converged());
  EXPECT_GT(r.load.maxCoeff(), 1.0);
  EXPECT_TRUE(r.capacity_violated);
}

TEST(FixedPoint, RejectsBadConfigAndStart) {
  SolverConfig cfg;
  cfg.tolerance = 0.0;
  const auto s = symmetric_pair(0.5);
  const auto p = JtPattern::single({0, 1}, 2);
  EXPECT_THROW(fixed_point_solve(s, p, cfg), PreconditionError);
  cfg = {};
  cfg.divergence_ceiling = 1.0;
  EXPECT_THROW(fixed_point_solve(s, p, cfg), PreconditionError);
  EXPECT_THROW(fixed_point_solve(s, p, LoadVector{{-1.0, 0.0}}), DomainError);
  EXPECT_THROW(fixed_point_solve(s, p, LoadVector::Zero(3)), StructuralError);
}

TEST(Feasibility, Probe) {
  const auto s = symmetric_pair(0.5);
  const auto p = JtPattern::single({0, 1}, 2);
  const auto r = fixed_point_solve(s, p);
  EXPECT_TRUE(feasibility_probe(s, p, r.load + LoadVector::Constant(2, 1e-9)));
  EXPECT_FALSE(feasibility_probe(s, p, LoadVector::Zero(2)));
  EXPECT_TRUE(feasibility_probe(s, p, LoadVector::Ones(2)));
  EXPECT_FALSE(feasibility_probe(symmetric_pair(20.0), p, LoadVector::Ones(2)));
}

TEST(Feasibility, ExactFixedPointPasses) {
  // Constant map: the fixed point is exact.
  Eigen::MatrixXd g(1, 1);
  g << 1.0;
  const NetworkScenario s({{1.0, CellKind::Macro, {}}}, {{0.5, {}}}, g, 1.0, 1.0, 1);
  const auto p = JtPattern::single({0}, 1);
  EXPECT_TRUE(feasibility_probe(s, p, fixed_point_solve(s, p).load));
}

TEST(SifChecks, ZeroSampleHolds) {
  std::mt19937_64 rng(21);
  const auto s = testing::random_scenario(rng, 4, 10);
  const auto p = testing::random_pattern(rng, 4, 10, 2);
  EXPECT_TRUE(check_scalability(s, p, 1, 5).ok());
  EXPECT_TRUE(check_monotonicity(s, p, 2, 5).ok());
}

TEST(SifChecks, RandomInstanceHasNoViolations) {
  std::mt19937_64 rng(22);
  const auto s = testing::random_scenario(rng, 6, 30);
  const auto p = testing::random_pattern(rng, 6, 30, 3);
  const auto scal = check_scalability(s, p, 1000, 7);
  const auto mono = check_monotonicity(s, p, 1000, 8);
  EXPECT_EQ(scal.samples_checked, 1000);
  EXPECT_TRUE(scal.ok());
  EXPECT_EQ(mono.samples_checked, 1000);
  EXPECT_TRUE(mono.ok());
}

TEST(SifChecks, RefusesFullyServedUes) {
  std::mt19937_64 rng(23);
  const auto s = testing::random_scenario(rng, 3, 5);
  const JtPattern full(JtPattern::Matrix::Ones(3, 5), 3);
  EXPECT_THROW(check_scalability(s, full, 10, 1), PreconditionError);
  EXPECT_THROW(check_monotonicity(s, full, 10, 1), PreconditionError);
}

TEST(SolverProperties, UniqueFixedPoint) {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int t = 0; t < 40; ++t) {
    const int n = testing::uniform_int(rng, 2, 10);
    const auto s = testing::random_scenario(rng, n, testing::uniform_int(rng, 1, 50), 0.001, 0.01);
    const auto p = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 3);
    const auto a = fixed_point_solve(s, p, LoadVector::Zero(s.num_cells()));
    const auto b = fixed_point_solve(s, p, LoadVector::Ones(s.num_cells()));
    if (!a.converged() || !b.converged()) continue;
    ++compared;
    // The stopping rule bounds the residual, not the distance to the fixed
    // point; slow contractions leave gaps above 10 * tolerance.
    EXPECT_LE((a.load - b.load).cwiseAbs().maxCoeff(), 1e-6);
  }
  EXPECT_GT(compared, 20);
}

TEST(SolverProperties, MonotoneDecreaseResumes) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 30; ++t) {
    const auto s = testing::random_sized_scenario(rng);
    const auto p = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 3);
    const auto fp = fixed_point_solve(s, p);
    if (!fp.converged()) continue;
    LoadVector x = fp.load * 1.5 + LoadVector::Constant(s.num_cells(), 0.01);
    if (!(coupled_map(s, p, x).array() <= x.array()).all()) continue;
    for (int k = 0; k < 100; ++k) {
      const LoadVector next = coupled_map(s, p, x);
      ASSERT_TRUE((next.array() <= x.array()).all()) << "instance " << t << " step " << k;
      x = next;
    }
    EXPECT_LE((x - fp.load).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SolverProperties, IncreasesMonotonicallyFromZero) {
  std::mt19937_64 rng(33);
  const auto s = testing::random_scenario(rng, 5, 20);
  const auto p = testing::random_pattern(rng, 5, 20, 2);
  LoadVector x = LoadVector::Zero(5);
  for (int k = 0; k < 50; ++k) {
    const LoadVector next = coupled_map(s, p, x);
    ASSERT_TRUE((next.array() >= x.array()).all());
    x = next;
  }
}

TEST(SolverProperties, Deterministic) {
  std::mt19937_64 rng(34);
  const auto s = testing::random_scenario(rng, 7, 40);
  const auto p = testing::random_pattern(rng, 7, 40, 2);
  const auto a = fixed_point_solve(s, p);
  const auto b = fixed_point_solve(s, p);
  EXPECT_EQ(a.load, b.load);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.residual, b.residual);
}

TEST(SolverProperties, ConvergedResidualWithinTolerance) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 30; ++t) {
    const auto s = testing::random_sized_scenario(rng);
    const auto p = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 2);
    const auto r = fixed_point_solve(s, p);
    if (!r.converged()) continue;
    const double residual = (coupled_map(s, p, r.load) - r.load).cwiseAbs().maxCoeff();
    EXPECT_EQ(residual, r.residual);
    EXPECT_LE(residual, SolverConfig{}.tolerance);
    EXPECT_EQ(r.capacity_violated, (r.load.array() > 1.0).any());
  }
}

TEST(SolveStatus, Names) {
  EXPECT_EQ(to_string(SolveStatus::Converged), "converged");
  EXPECT_EQ(to_string(SolveStatus::Diverged), "diverged");
  EXPECT_EQ(to_string(SolveStatus::IterationCapReached), "iteration_cap");
}

}  // namespace
}  // namespace jtload
