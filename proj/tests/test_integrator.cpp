#include <gtest/gtest.h>

#include <cmath>

#include "hybridps/integrator.hpp"
#include "hybridps/stats.hpp"

using namespace hybridps;

namespace {

const std::array<double, 4> kNoNoise{};

SystemParams harmonic(double wa) {
  SystemParams s;
  s.omega_a = wa;
  s.chi_a = s.chi_b = 0.0;
  s.coupling = CouplingSchedule::constant(0.0);
  return s;
}

RunDescriptor fig2_run(Method m, std::uint64_t n, double t_final, std::uint64_t interval = 20) {
  EnsembleConfig c;
  c.n_trajectories = n;
  c.n_batches = 10;
  c.t_final = t_final;
  c.sample_interval = interval;
  return validate_config(c, MethodSpec(m), SystemParams{});
}

}  // namespace

TEST(Step, ZeroDriftZeroNoiseIsIdentity) {
  const dynamics::Equations eq(Method::hybrid, harmonic(0.0), 0.0);
  TrajectoryState st{{cplx(1, 2), cplx(3, -1), cplx(0.5, 0.5), cplx(0.1, 0)}};
  const auto before = st.point;
  for (auto scheme : {StepScheme::exponential_euler, StepScheme::explicit_euler, StepScheme::log_euler}) {
    euler_maruyama_step(st, eq, 0.0, 1e-4, kNoNoise, 1e9, scheme);
    EXPECT_EQ(st.point, before);
  }
}

TEST(Step, ExplicitEulerAddsDriftTimesDt) {
  SystemParams s;
  s.chi_a = 1.0;
  s.coupling = CouplingSchedule::constant(1.0);
  const dynamics::Equations eq(Method::hybrid, s, 1.0);
  TrajectoryState st{{1, 2, 0, 0}};
  euler_maruyama_step(st, eq, 0.0, 1e-4, kNoNoise, 1e9, StepScheme::explicit_euler);
  EXPECT_NEAR(std::abs(st.point.alpha - (1.0 + cplx(0, -2) * 1e-4)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(st.point.alpha_plus - (2.0 + cplx(0, 4) * 1e-4)), 0.0, 1e-16);
}

TEST(Step, ExponentialEulerAgreesWithEulerToSecondOrder) {
  SystemParams s;
  const dynamics::Equations eq(Method::hybrid, s, 1.0);
  const PhasePoint p{cplx(3, 1), cplx(3, -1), cplx(0.1, 0), cplx(0.1, 0)};
  const std::array<double, 4> xi{0.3, -1.2, 0.7, 0.1};
  const double h = 1e-6;
  TrajectoryState a{p}, b{p};
  euler_maruyama_step(a, eq, 0.0, h, xi, 1e9, StepScheme::exponential_euler);
  euler_maruyama_step(b, eq, 0.0, h, xi, 1e9, StepScheme::explicit_euler);
  for (std::size_t i = 0; i < 4; ++i) {
    const double step = std::abs(b.point[i] - p[i]);
    EXPECT_LE(std::abs(a.point[i] - b.point[i]), 100.0 * step * std::sqrt(h)) << i;
  }
}

TEST(Step, BlowupFreezesPoint) {
  SystemParams s;
  const dynamics::Equations eq(Method::hybrid, s, 1.0);
  TrajectoryState st{{cplx(5, 0), cplx(5, 0), 0, 0}};
  const auto before = st.point;
  euler_maruyama_step(st, eq, 0.25, 1e-4, kNoNoise, 1.0);
  EXPECT_FALSE(st.live);
  EXPECT_DOUBLE_EQ(st.blowup_time, 0.25 + 1e-4);
  EXPECT_EQ(st.point, before);
  euler_maruyama_step(st, eq, 0.3, 1e-4, kNoNoise, 1e9);
  EXPECT_EQ(st.point, before);
}

TEST(Step, NonFiniteCountsAsBlowup) {
  const dynamics::Equations eq(Method::hybrid, SystemParams{}, 1.0);
  TrajectoryState st{{cplx(1, 0), cplx(1, 0), 0, 0}};
  euler_maruyama_step(st, eq, 0.0, 1e-4, {std::nan(""), 0, 0, 0}, 1e9);
  EXPECT_FALSE(st.live);
}

TEST(TimeGrid, ShortenedStepLandsOnBreakpoint) {
  EnsembleConfig c;
  c.dt = 3e-5;
  c.t_final = 0.2;
  c.sample_interval = 1000;
  const auto grid = TimeGrid::build(c, CouplingSchedule::switch_off(1.0, 0.1));
  int hits = 0, shortened = 0;
  for (const auto& st : grid.steps) {
    EXPECT_LE(st.h, c.dt * (1 + 1e-12));
    if (st.t0 + st.h == 0.1) ++hits;
    if (st.h < c.dt * (1 - 1e-9)) ++shortened;
    if (st.t0 < 0.1) EXPECT_LE(st.t0 + st.h, 0.1);
    EXPECT_EQ(grid.couplings[st.segment], st.t0 < 0.1 ? 1.0 : 0.0);
  }
  EXPECT_EQ(hits, 1);
  EXPECT_EQ(shortened, 2);  // one before 0.1, one before t_final
  EXPECT_EQ(grid.steps.back().t0 + grid.steps.back().h, 0.2);
  EXPECT_EQ(grid.sample_times.back(), 0.2);
}

TEST(TimeGrid, SamplesEveryIntervalPlusFinal) {
  EnsembleConfig c;
  c.dt = 0.1;
  c.t_final = 1.05;
  c.sample_interval = 3;
  const auto grid = TimeGrid::build(c, CouplingSchedule::constant(1.0));
  EXPECT_EQ(grid.steps.size(), 11u);
  ASSERT_EQ(grid.sample_times.size(), 5u);
  EXPECT_NEAR(grid.sample_times[1], 0.3, 1e-15);
  EXPECT_NEAR(grid.sample_times[3], 0.9, 1e-15);
  EXPECT_EQ(grid.sample_times[4], 1.05);
}

TEST(Trajectory, HarmonicRotation) {
  EnsembleConfig c;
  c.n_trajectories = 1;
  c.n_batches = 1;
  c.t_final = 1.0;
  c.sample_interval = 1000;
  c.N_a0 = 1.0;
  c.N_b0 = 0.0;
  for (auto scheme : {StepScheme::explicit_euler, StepScheme::exponential_euler}) {
    c.scheme = scheme;
    const auto run = validate_config(c, MethodSpec(Method::positive_p), harmonic(1.0));
    const auto rec = simulate_trajectory(run, 0);
    for (std::size_t s = 0; s < rec.samples.size(); ++s) {
      const double t = 0.1 * static_cast<double>(s);
      EXPECT_NEAR(std::abs(rec.samples[s].alpha - std::polar(1.0, -t)), 0.0, scheme == StepScheme::explicit_euler ? 1e-4 : 1e-12);
    }
  }
}

// Single mode positive-P without noise: alpha+ alpha stays real and |alpha|
// is constant (a circle).
TEST(Trajectory, NoiseFreeSingleModeCircles) {
  SystemParams s;
  s.chi_b = 0.0;
  s.coupling = CouplingSchedule::constant(0.0);
  const dynamics::Equations eq(Method::positive_p, s, 0.0);
  TrajectoryState st{{cplx(1, 0), cplx(1, 0), 0, 0}};
  for (int k = 0; k < 10000; ++k) {
    euler_maruyama_step(st, eq, k * 1e-4, 1e-4, kNoNoise, 1e9);
    ASSERT_NEAR(std::abs(st.point.alpha), 1.0, 1e-12);
  }
}

TEST(Trajectory, NoiseFreeHybridConservesNumberProduct) {
  SystemParams s;
  const dynamics::Equations eq(Method::hybrid, s, 1.0);
  TrajectoryState st{{cplx(10, 0.3), cplx(10, -0.3), cplx(0.1, 0.02), cplx(0.1, -0.02)}};
  const cplx n0 = st.point.alpha_plus * st.point.alpha;
  for (int k = 0; k < 2000; ++k) euler_maruyama_step(st, eq, k * 1e-4, 1e-4, kNoNoise, 1e9);
  EXPECT_NEAR(std::abs(st.point.alpha_plus * st.point.alpha - n0), 0.0, 1e-12 * std::abs(n0));
}

TEST(Trajectory, TruncationChangesNothingWithoutNoise) {
  SystemParams s;
  const dynamics::Equations full(Method::hybrid, s, 1.0), trunc(Method::hybrid_truncated, s, 1.0);
  TrajectoryState a{{cplx(10, 0), cplx(10, 0), cplx(0.1, 0), cplx(0.1, 0)}}, b = a;
  for (int k = 0; k < 2000; ++k) {
    euler_maruyama_step(a, full, k * 1e-4, 1e-4, kNoNoise, 1e9);
    euler_maruyama_step(b, trunc, k * 1e-4, 1e-4, kNoNoise, 1e9);
  }
  EXPECT_EQ(a.point, b.point);
}

TEST(Trajectory, LogEulerConservesNumberProductUnderNoise) {
  auto run = fig2_run(Method::hybrid, 10, 1.0, 100);
  run.config.scheme = StepScheme::log_euler;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto rec = simulate_trajectory(run, i);
    const cplx n0 = rec.samples.front().n_a;
    for (const auto& m : rec.samples) EXPECT_NEAR(std::abs(m.n_a - n0), 0.0, 1e-11 * std::abs(n0));
  }
}

TEST(Ensemble, DeterministicAcrossWorkerCounts) {
  const auto run = fig2_run(Method::hybrid, 200, 0.05);
  const auto a = run_ensemble(run, 1);
  const auto b = run_ensemble(run, 3);
  const auto c = run_ensemble(run, 10);
  EXPECT_EQ(a.sums, b.sums);
  EXPECT_EQ(a.sums, c.sums);
  EXPECT_EQ(a.live_count, c.live_count);
  EXPECT_EQ(a.times, c.times);
}

TEST(Ensemble, SingletonEqualsTrajectory) {
  EnsembleConfig c;
  c.n_trajectories = 1;
  c.n_batches = 1;
  c.t_final = 0.02;
  const auto run = validate_config(c, MethodSpec(Method::hybrid), SystemParams{});
  const auto res = run_ensemble(run, 1);
  const auto rec = simulate_trajectory(run, 0);
  ASSERT_EQ(res.n_samples(), rec.samples.size());
  for (std::size_t s = 0; s < rec.samples.size(); ++s)
    EXPECT_EQ(res.batch_mean(s, 0).as_array(), rec.samples[s].as_array());
}

TEST(Ensemble, BatchCountsSumToTrajectoriesAndLiveFractionMonotone) {
  const auto run = fig2_run(Method::positive_p, 200, 0.2);
  const auto res = run_ensemble(run, 2);
  std::uint64_t dead = 0;
  for (std::size_t s = 0; s < res.n_samples(); ++s) {
    std::uint64_t live = 0;
    for (std::size_t b = 0; b < res.n_batches; ++b) live += res.live(s, b);
    const auto died_by_now = static_cast<std::uint64_t>(std::count_if(
        res.blowup_times.begin(), res.blowup_times.end(), [&](double t) { return t <= res.times[s] + 1e-12; }));
    EXPECT_EQ(live + died_by_now, res.n_trajectories);
    if (s > 0) EXPECT_LE(res.live_fraction[s], res.live_fraction[s - 1]);
    dead = died_by_now;
  }
  EXPECT_GT(dead, 0u);  // positive-P at these parameters does blow up
}

TEST(Ensemble, HalvingStepChangesXaByLessThanStderr) {
  auto coarse = fig2_run(Method::hybrid, 4000, 0.1, 10);
  coarse.config.dt = 2e-4;
  auto fine = fig2_run(Method::hybrid, 4000, 0.1, 20);
  const auto sc = stats::observable_series(run_ensemble(coarse), coarse, "X_a");
  const auto sf = stats::observable_series(run_ensemble(fine), fine, "X_a");
  ASSERT_NEAR(sc.times.back(), 0.1, 1e-12);
  ASSERT_NEAR(sf.times.back(), 0.1, 1e-12);
  EXPECT_LT(std::fabs(sc.mean.back() - sf.mean.back()), std::max(sc.stderr_.back(), sf.stderr_.back()));
}
