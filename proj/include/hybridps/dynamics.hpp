#pragma once

// Drift vectors and noise-factor matrices of the Ito SDEs for each method,
// in the basis (alpha, alpha+, beta, beta+).
//
// Every drift component has the form A_mu = rate_mu * z_mu, and every noise
// entry is proportional to its own row variable. The integrator relies on the
// first property for its exponential step.

#include <array>
#include <cmath>
#include <complex>

#include "hybridps/core.hpp"

namespace hybridps::dynamics {

using DriftVector = std::array<cplx, 4>;
using Rates = std::array<cplx, 4>;
using Matrix4 = std::array<std::array<cplx, 4>, 4>;

inline constexpr cplx kI{0.0, 1.0};

// B with `columns` real noises; unused columns stay zero.
struct NoiseFactor {
  Matrix4 b{};
  int columns = 0;

  // B * B^T (plain transpose).
  [[nodiscard]] Matrix4 diffusion() const noexcept {
    Matrix4 d{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int n = 0; n < columns; ++n) d[i][j] += b[i][n] * b[j][n];
    return d;
  }

  [[nodiscard]] std::array<cplx, 4> apply(const std::array<double, 4>& xi) const noexcept {
    std::array<cplx, 4> out{};
    for (int i = 0; i < 4; ++i)
      for (int n = 0; n < columns; ++n) out[i] += b[i][n] * xi[n];
    return out;
  }
};

inline DriftVector drift_from_rates(const Rates& rates, const PhasePoint& p) noexcept {
  return {rates[0] * p.alpha, rates[1] * p.alpha_plus, rates[2] * p.beta, rates[3] * p.beta_plus};
}

// beta+ beta as seen by the hybrid_truncated equations.
inline double apply_further_truncation(const PhasePoint& p) noexcept { return (p.beta_plus * p.beta).real(); }

// ---------------------------------------------------------------------------
// Hybrid: mode a Wigner, mode b positive-P, third-order terms truncated.

inline Rates hybrid_rates(const PhasePoint& p, const SystemParams& s, double g, bool truncated = false) noexcept {
  const cplx na = p.alpha_plus * p.alpha;
  const cplx nb = truncated ? cplx(apply_further_truncation(p), 0.0) : p.beta_plus * p.beta;
  const cplx phase_a = s.omega_a + 2.0 * s.chi_a * (na - 1.0) + g * nb;
  const cplx phase_b = s.omega_b + 2.0 * s.chi_b * nb + g * (na - 0.5);
  return {-kI * phase_a, kI * phase_a, -kI * phase_b, kI * phase_b};
}

inline DriftVector hybrid_drift(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  return drift_from_rates(hybrid_rates(p, s, g), p);
}

inline NoiseFactor hybrid_noise_factor(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  NoiseFactor f;
  f.columns = 4;
  const cplx self = std::sqrt(cplx(0.0, 2.0 * s.chi_b));
  const cplx iface = 0.5 * std::sqrt(cplx(0.0, -g));
  f.b[2][0] = self * kI * p.beta;
  f.b[3][1] = self * p.beta_plus;
  f.b[0][2] = iface * p.alpha;
  f.b[0][3] = iface * kI * p.alpha;
  f.b[1][2] = -iface * p.alpha_plus;
  f.b[1][3] = -iface * kI * p.alpha_plus;
  f.b[2][2] = iface * p.beta;
  f.b[2][3] = -iface * kI * p.beta;
  f.b[3][2] = iface * p.beta_plus;
  f.b[3][3] = -iface * kI * p.beta_plus;
  return f;
}

// Diffusion matrix of the truncated hybrid Fokker-Planck equation, evaluated
// entry by entry (independent of the factorisation above).
inline Matrix4 hybrid_diffusion(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  const cplx h = 0.5 * kI * g;
  Matrix4 d{};
  d[0][2] = d[2][0] = -h * p.alpha * p.beta;
  d[0][3] = d[3][0] = -h * p.alpha * p.beta_plus;
  d[1][2] = d[2][1] = h * p.alpha_plus * p.beta;
  d[1][3] = d[3][1] = h * p.alpha_plus * p.beta_plus;
  d[2][2] = -2.0 * kI * s.chi_b * p.beta * p.beta;
  d[3][3] = 2.0 * kI * s.chi_b * p.beta_plus * p.beta_plus;
  return d;
}

// ---------------------------------------------------------------------------
// Positive-P on both modes.
//
//   dalpha = -i(w_a + 2 chi_a a+a + g b+b) alpha dt + noise
//   dbeta  = -i(w_b + 2 chi_b b+b + g a+a) beta dt + noise
//   D_aa = -2i chi_a alpha^2,   D_bb = -2i chi_b beta^2,   D_ab = -i g alpha beta
//   and the conjugate-structured entries on (alpha+, beta+); D_ab+ = D_a+b = 0.
// Writing the unprimed block as -i diag(z) K diag(z), K = [[2chi_a, g], [g, 2chi_b]],
// and K = Q diag(l) Q^T gives B = diag(z) Q diag(sqrt(-i l)) for (alpha, beta)
// and diag(z+) Q diag(sqrt(i l)) for (alpha+, beta+).

struct CouplingEigen {
  double q[2][2];
  double lambda[2];
};

inline CouplingEigen coupling_eigen(const SystemParams& s, double g) noexcept {
  const double k11 = 2.0 * s.chi_a;
  const double k22 = 2.0 * s.chi_b;
  if (g == 0.0) return {{{1.0, 0.0}, {0.0, 1.0}}, {k11, k22}};
  const double theta = 0.5 * std::atan2(2.0 * g, k11 - k22);
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  return {{{c, -sn}, {sn, c}},
          {k11 * c * c + 2.0 * g * c * sn + k22 * sn * sn, k11 * sn * sn - 2.0 * g * c * sn + k22 * c * c}};
}

inline Rates positive_p_rates(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  const cplx na = p.alpha_plus * p.alpha;
  const cplx nb = p.beta_plus * p.beta;
  const cplx phase_a = s.omega_a + 2.0 * s.chi_a * na + g * nb;
  const cplx phase_b = s.omega_b + 2.0 * s.chi_b * nb + g * na;
  return {-kI * phase_a, kI * phase_a, -kI * phase_b, kI * phase_b};
}

inline NoiseFactor positive_p_noise_factor(const PhasePoint& p, const CouplingEigen& e) noexcept {
  NoiseFactor f;
  f.columns = 4;
  for (int k = 0; k < 2; ++k) {
    const cplx un = std::sqrt(cplx(0.0, -e.lambda[k]));
    const cplx pr = std::sqrt(cplx(0.0, e.lambda[k]));
    f.b[0][k] = p.alpha * e.q[0][k] * un;
    f.b[2][k] = p.beta * e.q[1][k] * un;
    f.b[1][2 + k] = p.alpha_plus * e.q[0][k] * pr;
    f.b[3][2 + k] = p.beta_plus * e.q[1][k] * pr;
  }
  return f;
}

inline Matrix4 positive_p_diffusion(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  Matrix4 d{};
  d[0][0] = -2.0 * kI * s.chi_a * p.alpha * p.alpha;
  d[1][1] = 2.0 * kI * s.chi_a * p.alpha_plus * p.alpha_plus;
  d[2][2] = -2.0 * kI * s.chi_b * p.beta * p.beta;
  d[3][3] = 2.0 * kI * s.chi_b * p.beta_plus * p.beta_plus;
  d[0][2] = d[2][0] = -kI * g * p.alpha * p.beta;
  d[1][3] = d[3][1] = kI * g * p.alpha_plus * p.beta_plus;
  return d;
}

struct PositivePEquations {
  DriftVector drift;
  NoiseFactor noise;
};

inline PositivePEquations positive_p_two_mode(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  return {drift_from_rates(positive_p_rates(p, s, g), p), positive_p_noise_factor(p, coupling_eigen(s, g))};
}

// ---------------------------------------------------------------------------
// Truncated Wigner on both modes: the drift is -i dH_W/dz* with the Weyl
// symbol H_W = w_a(|a|^2 - 1/2) + chi_a(|a|^4 - 2|a|^2 + 1/2) + (a <-> b)
//              + g(|a|^2 - 1/2)(|b|^2 - 1/2); there is no diffusion.

inline Rates wigner_rates(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  const cplx na = p.alpha_plus * p.alpha;
  const cplx nb = p.beta_plus * p.beta;
  const cplx phase_a = s.omega_a + 2.0 * s.chi_a * (na - 1.0) + g * (nb - 0.5);
  const cplx phase_b = s.omega_b + 2.0 * s.chi_b * (nb - 1.0) + g * (na - 0.5);
  return {-kI * phase_a, kI * phase_a, -kI * phase_b, kI * phase_b};
}

inline DriftVector wigner_truncated(const PhasePoint& p, const SystemParams& s, double g) noexcept {
  return drift_from_rates(wigner_rates(p, s, g), p);
}

// ---------------------------------------------------------------------------

// Noise entries are B[i][n] = z_i * K[i][n] with K independent of the state.
inline Matrix4 hybrid_noise_coefficients(const SystemParams& s, double g) noexcept {
  const PhasePoint unit{1.0, 1.0, 1.0, 1.0};
  return hybrid_noise_factor(unit, s, g).b;
}

inline Matrix4 positive_p_noise_coefficients(const CouplingEigen& e) noexcept {
  const PhasePoint unit{1.0, 1.0, 1.0, 1.0};
  return positive_p_noise_factor(unit, e).b;
}

// Method-dispatching evaluator for a fixed coupling value. Cheap to build;
// the integrator makes one per coupling segment.
class Equations {
 public:
  Equations(Method method, const SystemParams& params, double g) noexcept
      : method_(method), params_(params), g_(g) {
    switch (method_) {
      case Method::hybrid:
      case Method::hybrid_truncated: coeff_ = hybrid_noise_coefficients(params_, g_); break;
      case Method::positive_p: coeff_ = positive_p_noise_coefficients(coupling_eigen(params_, g_)); break;
      case Method::wigner: break;
    }
    for (int i = 0; i < 4; ++i)
      for (int n = 0; n < 4; ++n) ito_[i] += coeff_[i][n] * coeff_[i][n];
  }

  [[nodiscard]] Rates rates(const PhasePoint& p) const noexcept {
    switch (method_) {
      case Method::hybrid: return hybrid_rates(p, params_, g_, false);
      case Method::hybrid_truncated: return hybrid_rates(p, params_, g_, true);
      case Method::positive_p: return positive_p_rates(p, params_, g_);
      case Method::wigner: return wigner_rates(p, params_, g_);
    }
    return {};
  }

  [[nodiscard]] DriftVector drift(const PhasePoint& p) const noexcept { return drift_from_rates(rates(p), p); }

  [[nodiscard]] NoiseFactor noise(const PhasePoint& p) const noexcept {
    NoiseFactor f;
    f.columns = noise_count();
    for (int i = 0; i < 4; ++i)
      for (int n = 0; n < f.columns; ++n) f.b[i][n] = p[static_cast<std::size_t>(i)] * coeff_[i][n];
    return f;
  }

  // K with B(z) = diag(z) K.
  [[nodiscard]] const Matrix4& noise_coefficients() const noexcept { return coeff_; }

  // sum_n K[i][n]^2: the Ito correction of d ln z_i is -ito_correction[i]/2.
  [[nodiscard]] const std::array<cplx, 4>& ito_correction() const noexcept { return ito_; }

  [[nodiscard]] int noise_count() const noexcept { return method_ == Method::wigner ? 0 : 4; }
  [[nodiscard]] Method method() const noexcept { return method_; }
  [[nodiscard]] double coupling() const noexcept { return g_; }

 private:
  Method method_;
  SystemParams params_;
  double g_;
  Matrix4 coeff_{};
  std::array<cplx, 4> ito_{};
};

}  // namespace hybridps::dynamics
