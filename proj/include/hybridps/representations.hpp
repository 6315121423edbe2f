#pragma once

// Initial-state sampling per representation and the conversion of raw
// stochastic moments into physical expectation values.
//
// Ordering rules used below (mode operator c, stochastic pair z, z+):
//   positive-P (normal):   <c^dag^m c^n>      = <<z+^m z^n>>
//   Wigner (symmetric):    <{c^dag^m c^n}_sym> = <<z+^m z^n>>
// Weyl symbols needed here:
//   N   = c^dag c                 -> z+ z - 1/2
//   N^2                           -> (z+ z)^2 - z+ z
//   Y^2 = -(c^2 + c^dag^2 - c^dag c - c c^dag)/4
//                                 -> -(z^2 + z+^2 - 2 z+ z)/4
// and the normal-ordered forms
//   N^2 = c^dag^2 c^2 + c^dag c   -> (z+ z)^2 + z+ z
//   Y^2                           -> -(z^2 + z+^2 - 2 z+ z - 1)/4

#include <array>
#include <cmath>
#include <complex>
#include <tuple>
#include <utility>

#include "hybridps/core.hpp"
#include "hybridps/rng.hpp"

namespace hybridps {

struct CoherentInit {
  cplx gamma_a;
  cplx gamma_b;

  static CoherentInit from_occupations(double N_a0, double N_b0) {
    return {cplx(std::sqrt(N_a0), 0.0), cplx(std::sqrt(N_b0), 0.0)};
  }
};

// Ensemble averages of the stochastic monomials the estimators need.
struct RawMoments {
  cplx alpha{};
  cplx alpha_plus{};
  cplx beta{};
  cplx beta_plus{};
  cplx n_a{};      // alpha+ alpha
  cplx n_b{};      // beta+ beta
  cplx n_a_sq{};   // (alpha+ alpha)^2
  cplx beta_sq{};  // beta^2
  cplx beta_plus_sq{};
  cplx n_a_beta{};       // alpha+ alpha beta
  cplx n_a_beta_plus{};  // alpha+ alpha beta+

  static constexpr std::size_t count = 11;

  [[nodiscard]] std::array<cplx, count> as_array() const noexcept {
    return {alpha, alpha_plus, beta, beta_plus, n_a, n_b, n_a_sq, beta_sq, beta_plus_sq, n_a_beta, n_a_beta_plus};
  }

  static RawMoments from_array(const std::array<cplx, count>& v) noexcept {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
  }

  // The monomials of a single phase point.
  static RawMoments of(const PhasePoint& p) noexcept {
    const cplx na = p.alpha_plus * p.alpha;
    return {p.alpha,
            p.alpha_plus,
            p.beta,
            p.beta_plus,
            na,
            p.beta_plus * p.beta,
            na * na,
            p.beta * p.beta,
            p.beta_plus * p.beta_plus,
            na * p.beta,
            na * p.beta_plus};
  }
};

enum class Mode { a, b };

namespace representations {

// Doubled-Wigner coherent-state sample: alpha = gamma + (n1 + i n2)/2,
// alpha+ = conj(alpha). n1 is drawn before n2.
inline std::pair<cplx, cplx> sample_wigner_coherent(cplx gamma, double n1, double n2) noexcept {
  const cplx alpha = gamma + 0.5 * cplx(n1, n2);
  return {alpha, std::conj(alpha)};
}

inline std::pair<cplx, cplx> sample_wigner_coherent(cplx gamma, rng::TrajectoryStream& stream) noexcept {
  const double n1 = stream.normal();
  const double n2 = stream.normal();
  return sample_wigner_coherent(gamma, n1, n2);
}

// Positive-P coherent state: a delta function at (gamma, conj(gamma)).
inline std::pair<cplx, cplx> sample_positive_p_coherent(cplx gamma) noexcept { return {gamma, std::conj(gamma)}; }

// Draws the initial point for one trajectory. Four normals are always
// consumed (mode a n1, n2, then mode b n1, n2) so that every method sees the
// same step noise for a given stream.
inline PhasePoint sample_initial(const CoherentInit& init, MethodSpec method, rng::TrajectoryStream& stream) noexcept {
  std::array<double, 4> n{};
  for (double& x : n) x = stream.normal();
  PhasePoint p;
  auto mode = [&](cplx gamma, Rep r, double n1, double n2) {
    return r == Rep::wigner ? sample_wigner_coherent(gamma, n1, n2) : sample_positive_p_coherent(gamma);
  };
  std::tie(p.alpha, p.alpha_plus) = mode(init.gamma_a, method.r_a(), n[0], n[1]);
  std::tie(p.beta, p.beta_plus) = mode(init.gamma_b, method.r_b(), n[2], n[3]);
  return p;
}

// Ordering offset of the number operator: 0 for normal, 1/2 for symmetric.
constexpr double number_offset(Rep r) noexcept { return r == Rep::wigner ? 0.5 : 0.0; }

struct Quadratures {
  double x;
  double y;
};

inline Quadratures estimate_quadratures(const RawMoments& m, Mode mode) noexcept {
  const cplx z = mode == Mode::a ? m.alpha : m.beta;
  const cplx zp = mode == Mode::a ? m.alpha_plus : m.beta_plus;
  const cplx x = 0.5 * (z + zp);
  const cplx y = (z - zp) / cplx(0.0, 2.0);
  return {x.real(), y.real()};
}

// The r tag is accepted for symmetry with the other estimators; linear
// observables read the same under either ordering.
inline Quadratures estimate_quadratures(const RawMoments& m, Mode mode, Rep /*r*/) noexcept {
  return estimate_quadratures(m, mode);
}

inline double estimate_number(const RawMoments& m, Mode mode, Rep r) noexcept {
  const cplx n = mode == Mode::a ? m.n_a : m.n_b;
  return n.real() - number_offset(r);
}

// Mode a only: (alpha+ alpha)^2 is the sole quartic number monomial tracked.
inline double estimate_number_square(const RawMoments& m, Rep r) noexcept {
  return r == Rep::wigner ? (m.n_a_sq - m.n_a).real() : (m.n_a_sq + m.n_a).real();
}

inline double estimate_number_variance(const RawMoments& m, Rep r) noexcept {
  const double n = estimate_number(m, Mode::a, r);
  return estimate_number_square(m, r) - n * n;
}

inline double estimate_Yb_square(const RawMoments& m, Rep r) noexcept {
  const double commutator = r == Rep::wigner ? 0.0 : 1.0;
  return -0.25 * (m.beta_plus_sq + m.beta_sq - 2.0 * m.n_b - commutator).real();
}

inline double estimate_Yb_variance(const RawMoments& m, Rep r = Rep::positive_p) noexcept {
  const double y = estimate_quadratures(m, Mode::b).y;
  return estimate_Yb_square(m, r) - y * y;
}

// <N_a Y_b>; the modes commute, so each factor follows its own ordering.
inline double estimate_NaYb(const RawMoments& m, Rep r_a = Rep::wigner) noexcept {
  const double off = number_offset(r_a);
  const cplx v = (m.n_a_beta - m.n_a_beta_plus - off * (m.beta - m.beta_plus)) / cplx(0.0, 2.0);
  return v.real();
}

// Imaginary residue of the complex estimate behind an observable, used for
// the diagnostics check (physical values are real).
inline double imaginary_residue_quadrature(const RawMoments& m, Mode mode, bool y) noexcept {
  const cplx z = mode == Mode::a ? m.alpha : m.beta;
  const cplx zp = mode == Mode::a ? m.alpha_plus : m.beta_plus;
  return y ? ((z - zp) / cplx(0.0, 2.0)).imag() : (0.5 * (z + zp)).imag();
}

}  // namespace representations
}  // namespace hybridps
