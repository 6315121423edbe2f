#include <gtest/gtest.h>

#include <cmath>

#include "hybridps/representations.hpp"
#include "moments.hpp"

using namespace hybridps;
using namespace hybridps::representations;
using testing_support::close;

namespace {
const MethodSpec kAll[] = {MethodSpec(Method::hybrid), MethodSpec(Method::hybrid_truncated),
                           MethodSpec(Method::positive_p), MethodSpec(Method::wigner)};
}

TEST(SampleWigner, Examples) {
  auto [a0, ap0] = sample_wigner_coherent(10.0, 0.0, 0.0);
  EXPECT_EQ(a0, cplx(10, 0));
  EXPECT_EQ(ap0, cplx(10, 0));
  auto [a, ap] = sample_wigner_coherent(10.0, 2.0, -2.0);
  EXPECT_EQ(a, cplx(11, -1));
  EXPECT_EQ(ap, cplx(11, 1));
}

TEST(SampleWigner, EnsembleMomentsAndHalfQuantum) {
  rng::TrajectoryStream s(3, 0);
  const int n = 200000;
  const cplx gamma = 10.0;
  double mr = 0, mi = 0, vr = 0, vi = 0, na = 0;
  for (int i = 0; i < n; ++i) {
    auto [a, ap] = sample_wigner_coherent(gamma, s);
    ASSERT_EQ(ap, std::conj(a));
    mr += a.real();
    mi += a.imag();
    vr += (a.real() - 10.0) * (a.real() - 10.0);
    vi += a.imag() * a.imag();
    na += (ap * a).real();
  }
  mr /= n, mi /= n, vr /= n, vi /= n, na /= n;
  EXPECT_NEAR(mr, 10.0, 5 * 0.5 / std::sqrt(n));
  EXPECT_NEAR(mi, 0.0, 5 * 0.5 / std::sqrt(n));
  EXPECT_NEAR(vr, 0.25, 0.01);
  EXPECT_NEAR(vi, 0.25, 0.01);
  EXPECT_NEAR(na, 100.5, 5.0 / std::sqrt(n));
}

TEST(SamplePositiveP, Examples) {
  EXPECT_EQ(sample_positive_p_coherent(0.1), std::make_pair(cplx(0.1), cplx(0.1)));
  EXPECT_EQ(sample_positive_p_coherent(0.0), std::make_pair(cplx(0.0), cplx(0.0)));
  EXPECT_EQ(sample_positive_p_coherent(cplx(1, 1)), std::make_pair(cplx(1, 1), cplx(1, -1)));
}

TEST(SampleInitial, AlwaysConsumesFourNormals) {
  const auto init = CoherentInit::from_occupations(100, 0.01);
  for (const auto& m : kAll) {
    rng::TrajectoryStream s(1, 5);
    sample_initial(init, m, s);
    EXPECT_EQ(s.blocks_used(), 2u);
  }
}

TEST(SampleInitial, PositivePIsDeterministic) {
  const auto init = CoherentInit::from_occupations(4, 0.25);
  rng::TrajectoryStream s1(1, 0), s2(2, 9);
  EXPECT_EQ(sample_initial(init, MethodSpec(Method::positive_p), s1),
            sample_initial(init, MethodSpec(Method::positive_p), s2));
}

TEST(CoherentInit, OccupationsExact) {
  const auto c = CoherentInit::from_occupations(100, 0.01);
  EXPECT_EQ(std::norm(c.gamma_a), 100.0);
  EXPECT_DOUBLE_EQ(std::norm(c.gamma_b), 0.01);
}

TEST(EstimateQuadratures, Examples) {
  RawMoments m;
  m.alpha = 10;
  m.alpha_plus = 10;
  auto q = estimate_quadratures(m, Mode::a);
  EXPECT_EQ(q.x, 10);
  EXPECT_EQ(q.y, 0);
  m.beta = cplx(0, 1);
  m.beta_plus = cplx(0, -1);
  q = estimate_quadratures(m, Mode::b, Rep::positive_p);
  EXPECT_DOUBLE_EQ(q.x, 0);
  EXPECT_DOUBLE_EQ(q.y, 1);
  const cplx a(0.3, -1.7);
  m.alpha = a;
  m.alpha_plus = std::conj(a);
  q = estimate_quadratures(m, Mode::a, Rep::wigner);
  EXPECT_DOUBLE_EQ(q.x, a.real());
  EXPECT_DOUBLE_EQ(q.y, a.imag());
}

TEST(EstimateNumber, Examples) {
  RawMoments m;
  m.n_a = 100.5;
  EXPECT_DOUBLE_EQ(estimate_number(m, Mode::a, Rep::wigner), 100.0);
  m.n_b = 0.01;
  EXPECT_DOUBLE_EQ(estimate_number(m, Mode::b, Rep::positive_p), 0.01);
  m.n_a = 0.5;
  EXPECT_DOUBLE_EQ(estimate_number(m, Mode::a, Rep::wigner), 0.0);
}

TEST(EstimateNumberVariance, VacuumPositiveP) {
  const auto m = testing_support::exact_initial_moments(0.0, 0.0, MethodSpec(Method::positive_p));
  EXPECT_EQ(estimate_number_variance(m, Rep::positive_p), 0.0);
}

TEST(EstimateYbVariance, DeltaSampledCoherentAndVacuum) {
  for (double nb : {0.01, 0.0}) {
    const auto m = testing_support::exact_initial_moments(10.0, std::sqrt(nb), MethodSpec(Method::hybrid));
    EXPECT_NEAR(estimate_Yb_variance(m), 0.25, 1e-15);
  }
}

TEST(EstimateNaYb, Examples) {
  auto m = testing_support::exact_initial_moments(10.0, 0.1, MethodSpec(Method::hybrid));
  EXPECT_NEAR(estimate_NaYb(m), 0.0, 1e-14);
  // alpha+ alpha fixed at 7.5 on every trajectory, beta = i c.
  const double c = 0.3;
  PhasePoint p{cplx(2.5, 0), cplx(3.0, 0), cplx(0, c), cplx(0, -c)};
  m = RawMoments::of(p);
  EXPECT_NEAR(estimate_NaYb(m, Rep::wigner), (7.5 - 0.5) * c, 1e-14);
}

// Every conversion applied to the exact initial distribution gives the
// coherent-state values.
TEST(Estimators, ExactInitialMomentsGiveCoherentValues) {
  for (const auto& method : kAll) {
    for (double Na : {0.25, 1.0, 4.0, 100.0}) {
      for (double Nb : {0.01, 0.25}) {
        const cplx ga = std::sqrt(Na);
        const cplx gb = std::polar(std::sqrt(Nb), 0.7);
        const auto m = testing_support::exact_initial_moments(ga, gb, method);
        const Rep ra = method.r_a(), rb = method.r_b();
        SCOPED_TRACE(std::string(to_string(method.method())) + " Na=" + std::to_string(Na));
        EXPECT_NEAR(estimate_number(m, Mode::a, ra), Na, 1e-10);
        EXPECT_NEAR(estimate_number(m, Mode::b, rb), Nb, 1e-10);
        EXPECT_NEAR(estimate_number_variance(m, ra), Na, 1e-10 * std::max(1.0, Na));
        EXPECT_NEAR(estimate_Yb_variance(m, rb), 0.25, 1e-10);
        EXPECT_NEAR(estimate_quadratures(m, Mode::a).x, std::sqrt(Na), 1e-10);
        EXPECT_NEAR(estimate_NaYb(m, ra), Na * gb.imag(), 1e-10);
      }
    }
  }
}

// The conversions reproduce Fock-basis expectation values at t > 0 when fed
// the raw moments each representation must produce.
TEST(Estimators, AgreeWithFockOracle) {
  for (const auto& method : kAll) {
    for (double Na : {0.25, 1.0, 4.0}) {
      for (double Nb : {0.01, 0.25}) {
        const oracle::FockOracle f({SystemParams{}, Na, Nb});
        for (double t : {0.0, 0.05, 0.3, 1.0}) {
          const auto m = testing_support::fock_raw_moments(f, method, t);
          const Rep ra = method.r_a(), rb = method.r_b();
          SCOPED_TRACE(std::string(to_string(method.method())) + " Na=" + std::to_string(Na) +
                       " Nb=" + std::to_string(Nb) + " t=" + std::to_string(t));
          using oracle::Observable;
          EXPECT_TRUE(close(estimate_number(m, Mode::a, ra), f.expect(Observable::N_a, t)));
          EXPECT_TRUE(close(estimate_number(m, Mode::b, rb), f.expect(Observable::N_b, t)));
          EXPECT_TRUE(close(estimate_number_square(m, ra), f.expect(Observable::N_a_sq, t)));
          EXPECT_TRUE(close(estimate_Yb_square(m, rb), f.expect(Observable::Y_b_sq, t)));
          EXPECT_TRUE(close(estimate_NaYb(m, ra), f.expect(Observable::NaYb, t)));
          EXPECT_TRUE(close(estimate_quadratures(m, Mode::a).x, f.expect(Observable::X_a, t)));
          EXPECT_TRUE(close(estimate_quadratures(m, Mode::b).y, f.expect(Observable::Y_b, t)));
        }
      }
    }
  }
}

TEST(Estimators, ImaginaryResidueOfConjugatePairVanishes) {
  RawMoments m;
  m.alpha = cplx(1, 2);
  m.alpha_plus = cplx(1, -2);
  EXPECT_EQ(imaginary_residue_quadrature(m, Mode::a, false), 0.0);
  EXPECT_EQ(imaginary_residue_quadrature(m, Mode::a, true), 0.0);
  m.alpha_plus = cplx(1, -1);
  EXPECT_NE(imaginary_residue_quadrature(m, Mode::a, false), 0.0);
}
