#pragma once

// Exact reference values for coherent initial states.
//
// Two independent routes: closed-form expressions, and a number-basis
// evaluator that evolves the coherent amplitudes with the energy phases
// E(n_a, n_b) and applies operator words directly. With a piecewise coupling
// the interaction phase is n_a n_b * G(t), G(t) = integral of g from 0 to t,
// and the closed forms use G(t) wherever a constant coupling would give g t.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridps/core.hpp"

namespace hybridps::oracle {

struct OracleParams {
  SystemParams system;
  double N_a0 = 100.0;
  double N_b0 = 0.01;
};

struct QuadraturePair {
  double x;
  double y;
};

inline QuadraturePair exact_quadratures_a(double t, const OracleParams& p) noexcept {
  const auto& s = p.system;
  const double G = s.coupling.integral(t);
  const double amp = std::sqrt(p.N_a0) * std::exp(-(p.N_a0 * (1.0 - std::cos(2.0 * s.chi_a * t)) + p.N_b0 * (1.0 - std::cos(G))));
  const double phase = s.omega_a * t + p.N_a0 * std::sin(2.0 * s.chi_a * t) + p.N_b0 * std::sin(G);
  return {amp * std::cos(phase), -amp * std::sin(phase)};
}

inline QuadraturePair exact_quadratures_b(double t, const OracleParams& p) noexcept {
  const auto& s = p.system;
  const double G = s.coupling.integral(t);
  const double amp = std::sqrt(p.N_b0) * std::exp(-(p.N_b0 * (1.0 - std::cos(2.0 * s.chi_b * t)) + p.N_a0 * (1.0 - std::cos(G))));
  const double phase = s.omega_b * t + p.N_b0 * std::sin(2.0 * s.chi_b * t) + p.N_a0 * std::sin(G);
  return {amp * std::cos(phase), -amp * std::sin(phase)};
}

inline double exact_NaYb(double t, const OracleParams& p) noexcept {
  const auto& s = p.system;
  const double G = s.coupling.integral(t);
  return -p.N_a0 * std::sqrt(p.N_b0) * std::exp(-p.N_a0 * (1.0 - std::cos(G))) *
         std::exp(-p.N_b0 * (1.0 - std::cos(2.0 * s.chi_b * t))) *
         std::sin(s.omega_b * t + G + p.N_a0 * std::sin(G) + p.N_b0 * std::sin(2.0 * s.chi_b * t));
}

inline double exact_var_Yb(double t, const OracleParams& p) noexcept {
  const auto& s = p.system;
  const double G = s.coupling.integral(t);
  const double Na = p.N_a0;
  const double Nb = p.N_b0;
  const double first = -0.5 * Nb * std::exp(-(Na * (1.0 - std::cos(2.0 * G)) + Nb * (1.0 - std::cos(4.0 * s.chi_b * t)))) *
                       std::cos(2.0 * (s.omega_b + s.chi_b) * t + Na * std::sin(2.0 * G) + Nb * std::sin(4.0 * s.chi_b * t));
  const double sn = std::sin(s.omega_b * t + Na * std::sin(G) + Nb * std::sin(2.0 * s.chi_b * t));
  const double second = -Nb * std::exp(-2.0 * (Na * (1.0 - std::cos(G)) + Nb * (1.0 - std::cos(2.0 * s.chi_b * t)))) * sn * sn;
  return first + second + 0.25 + 0.5 * Nb;
}

// Numbers are conserved: <N> = N0 and V(N) = N0 for a coherent start.
inline double exact_number_a(const OracleParams& p) noexcept { return p.N_a0; }
inline double exact_number_b(const OracleParams& p) noexcept { return p.N_b0; }
inline double exact_var_Na(const OracleParams& p) noexcept { return p.N_a0; }

inline double exact_correlation(double t, const OracleParams& p) noexcept {
  const double var_y = exact_var_Yb(t, p);
  const double denom = std::sqrt(exact_var_Na(p)) * std::sqrt(var_y);
  if (denom == 0.0) return 0.0;
  return (exact_NaYb(t, p) - p.N_a0 * exact_quadratures_b(t, p).y) / denom;
}

// ---------------------------------------------------------------------------
// Number-basis oracle.

inline constexpr double kTailTolerance = 1e-12;

// Poisson upper tail P(n > k) summed term by term (no cancellation).
inline double poisson_tail(double mean, int k) {
  if (mean == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = k + 1;; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < 1e-30 * std::max(tail, 1e-300)) break;
    if (n > mean + 50.0 * std::sqrt(mean) + 200.0) break;
  }
  return tail;
}

// Smallest k with P(n > k) < kTailTolerance.
inline int minimal_cutoff(double mean) {
  int k = 0;
  while (poisson_tail(mean, k) >= kTailTolerance) ++k;
  return k;
}

// Headroom kept above the minimal cutoff so raising operators in short
// operator words do not reach the truncation edge.
inline constexpr int kCutoffMargin = 16;

struct Cutoffs {
  int a;
  int b;
};

inline Cutoffs default_cutoffs(double N_a0, double N_b0) {
  return {minimal_cutoff(N_a0) + kCutoffMargin, minimal_cutoff(N_b0) + kCutoffMargin};
}

enum class Observable { X_a, Y_a, X_b, Y_b, N_a, N_b, N_a_sq, Y_b_sq, NaYb };

inline std::string_view to_string(Observable o) noexcept {
  switch (o) {
    case Observable::X_a: return "X_a";
    case Observable::Y_a: return "Y_a";
    case Observable::X_b: return "X_b";
    case Observable::Y_b: return "Y_b";
    case Observable::N_a: return "N_a";
    case Observable::N_b: return "N_b";
    case Observable::N_a_sq: return "N_a_sq";
    case Observable::Y_b_sq: return "Y_b_sq";
    case Observable::NaYb: return "NaYb";
  }
  return "?";
}

// Operator words use 'a' for a, 'A' for a^dagger, 'b' and 'B' likewise.
// A word is the operator product read left to right.
class FockOracle {
 public:
  explicit FockOracle(OracleParams params, std::optional<Cutoffs> cutoffs = std::nullopt)
      : params_(std::move(params)) {
    const Cutoffs need = {minimal_cutoff(params_.N_a0), minimal_cutoff(params_.N_b0)};
    if (cutoffs) {
      if (cutoffs->a < need.a || cutoffs->b < need.b)
        throw std::invalid_argument("Fock cutoff too small for a 1e-12 Poisson tail; use at least (" +
                                    std::to_string(need.a) + ", " + std::to_string(need.b) + "), suggested (" +
                                    std::to_string(need.a + kCutoffMargin) + ", " +
                                    std::to_string(need.b + kCutoffMargin) + ")");
      cut_ = *cutoffs;
    } else {
      cut_ = {need.a + kCutoffMargin, need.b + kCutoffMargin};
    }
    amp_a_ = coherent_amplitudes(params_.N_a0, cut_.a);
    amp_b_ = coherent_amplitudes(params_.N_b0, cut_.b);
  }

  [[nodiscard]] const Cutoffs& cutoffs() const noexcept { return cut_; }

  // Expectation of the operator word at time t.
  [[nodiscard]] cplx expect_word(std::string_view word, double t) const {
    const auto psi = state(t);
    return inner(psi, apply_word(word, psi));
  }

  [[nodiscard]] double expect(Observable o, double t) const {
    const auto psi = state(t);
    auto ev = [&](std::string_view w) { return inner(psi, apply_word(w, psi)); };
    switch (o) {
      case Observable::X_a: return (0.5 * (ev("a") + ev("A"))).real();
      case Observable::Y_a: return ((ev("a") - ev("A")) / cplx(0.0, 2.0)).real();
      case Observable::X_b: return (0.5 * (ev("b") + ev("B"))).real();
      case Observable::Y_b: return ((ev("b") - ev("B")) / cplx(0.0, 2.0)).real();
      case Observable::N_a: return ev("Aa").real();
      case Observable::N_b: return ev("Bb").real();
      case Observable::N_a_sq: return ev("AaAa").real();
      case Observable::Y_b_sq: return (-0.25 * (ev("bb") + ev("BB") - ev("Bb") - ev("bB"))).real();
      case Observable::NaYb: return ((ev("Aab") - ev("AaB")) / cplx(0.0, 2.0)).real();
    }
    return 0.0;
  }

  // Variance of a Hermitian word taken as |(O - <O>) psi|^2, which avoids the
  // cancellation in <O^2> - <O>^2 at large occupation.
  [[nodiscard]] double variance_word(std::string_view word, double t) const {
    const auto psi = state(t);
    auto phi = apply_word(word, psi);
    const cplx mean = inner(psi, phi);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= mean * psi[i];
    return inner(phi, phi).real();
  }

  // Ordered moment <O_a O_b> where O_m is the product of mode m's letters in
  // `word_a` / `word_b` arranged per that mode's representation: symmetric
  // (average over distinct orderings) for Wigner, normal for positive-P.
  // This is the stochastic average <<z+^m z^n ...>> the representation
  // predicts for the matching monomial.
  [[nodiscard]] cplx ordered_moment(std::string word_a, Rep r_a, std::string word_b, Rep r_b, double t) const {
    const auto psi = state(t);
    const auto orders_a = orderings(std::move(word_a), r_a);
    const auto orders_b = orderings(std::move(word_b), r_b);
    cplx acc = 0.0;
    for (const auto& wa : orders_a)
      for (const auto& wb : orders_b) acc += inner(psi, apply_word(wa + wb, psi));
    return acc / static_cast<double>(orders_a.size() * orders_b.size());
  }

  [[nodiscard]] const OracleParams& params() const noexcept { return params_; }

 private:
  using State = std::vector<cplx>;

  static std::vector<double> coherent_amplitudes(double mean, int cutoff) {
    std::vector<double> c(cutoff + 1, 0.0);
    if (mean == 0.0) {
      c[0] = 1.0;
      return c;
    }
    for (int n = 0; n <= cutoff; ++n)
      c[n] = std::exp(-0.5 * mean + 0.5 * n * std::log(mean) - 0.5 * std::lgamma(n + 1.0));
    return c;
  }

  [[nodiscard]] std::size_t idx(int na, int nb) const noexcept {
    return static_cast<std::size_t>(na) * (cut_.b + 1) + nb;
  }

  [[nodiscard]] State state(double t) const {
    const auto& s = params_.system;
    const double G = s.coupling.integral(t);
    State psi((cut_.a + 1) * (cut_.b + 1));
    for (int na = 0; na <= cut_.a; ++na) {
      for (int nb = 0; nb <= cut_.b; ++nb) {
        const double e0 = s.omega_a * na + s.omega_b * nb + s.chi_a * (double(na) * na - na) +
                          s.chi_b * (double(nb) * nb - nb);
        const double phase = e0 * t + double(na) * nb * G;
        psi[idx(na, nb)] = amp_a_[na] * amp_b_[nb] * std::polar(1.0, -phase);
      }
    }
    return psi;
  }

  [[nodiscard]] State apply(char op, const State& in) const {
    State out(in.size(), 0.0);
    for (int na = 0; na <= cut_.a; ++na) {
      for (int nb = 0; nb <= cut_.b; ++nb) {
        const cplx v = in[idx(na, nb)];
        if (v == 0.0) continue;
        switch (op) {
          case 'a':
            if (na > 0) out[idx(na - 1, nb)] += std::sqrt(double(na)) * v;
            break;
          case 'A':
            if (na < cut_.a) out[idx(na + 1, nb)] += std::sqrt(double(na + 1)) * v;
            break;
          case 'b':
            if (nb > 0) out[idx(na, nb - 1)] += std::sqrt(double(nb)) * v;
            break;
          case 'B':
            if (nb < cut_.b) out[idx(na, nb + 1)] += std::sqrt(double(nb + 1)) * v;
            break;
          default: throw std::invalid_argument(std::string("unknown operator letter '") + op + "'");
        }
      }
    }
    return out;
  }

  [[nodiscard]] State apply_word(std::string_view word, State psi) const {
    for (auto it = word.rbegin(); it != word.rend(); ++it) psi = apply(*it, psi);
    return psi;
  }

  static cplx inner(const State& l, const State& r) noexcept {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) acc += std::conj(l[i]) * r[i];
    return acc;
  }

  static std::vector<std::string> orderings(std::string word, Rep r) {
    if (word.empty()) return {std::string()};
    // Uppercase (creation) letters sort first, which is normal order.
    std::sort(word.begin(), word.end());
    if (r == Rep::positive_p) return {word};
    std::vector<std::string> all;
    do {
      all.push_back(word);
    } while (std::next_permutation(word.begin(), word.end()));
    return all;
  }

  OracleParams params_;
  Cutoffs cut_{};
  std::vector<double> amp_a_;
  std::vector<double> amp_b_;
};

inline double fock_expect(Observable o, double t, const OracleParams& p, std::optional<Cutoffs> cutoffs = std::nullopt) {
  return FockOracle(p, cutoffs).expect(o, t);
}

}  // namespace hybridps::oracle
