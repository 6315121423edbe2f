#pragma once

// Domain types shared by every hybridps module.
//
// Time is dimensionless (chi_a * t with hbar = 1). All types here are plain
// values; construction helpers validate but never repair their inputs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hybridps {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One trajectory's phase-space coordinates (alpha, alpha+, beta, beta+).
struct PhasePoint {
  cplx alpha{};
  cplx alpha_plus{};
  cplx beta{};
  cplx beta_plus{};

  static constexpr std::size_t size = 4;

  cplx& operator[](std::size_t i) noexcept {
    switch (i) {
      case 0: return alpha;
      case 1: return alpha_plus;
      case 2: return beta;
      default: return beta_plus;
    }
  }
  const cplx& operator[](std::size_t i) const noexcept {
    return const_cast<PhasePoint&>(*this)[i];
  }

  [[nodiscard]] bool finite() const noexcept {
    for (std::size_t i = 0; i < size; ++i) {
      const cplx z = (*this)[i];
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
  }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < size; ++i) m = std::max(m, std::abs((*this)[i]));
    return m;
  }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

// Error raised for any configuration that violates a documented invariant.
// `field` names the offending configuration key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Piecewise-constant coupling g(t). Segments are (t_end, g) with strictly
// increasing t_end; the final segment always ends at +infinity. Evaluation is
// right-continuous: at a breakpoint the following segment's value applies.
class CouplingSchedule {
 public:
  struct Segment {
    double t_end;
    double g;
    friend bool operator==(const Segment&, const Segment&) = default;
  };

  CouplingSchedule() : segments_{{kInf, 0.0}} {}

  static CouplingSchedule constant(double g) { return CouplingSchedule({{kInf, g}}); }

  // g for t < t_off, zero afterwards.
  static CouplingSchedule switch_off(double g, double t_off) {
    return CouplingSchedule({{t_off, g}, {kInf, 0.0}});
  }

  // Throws ConfigError("coupling", ...) on malformed input. A final segment
  // with finite t_end is rejected rather than extended.
  explicit CouplingSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ConfigError("coupling", "coupling schedule must have at least one segment");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (!std::isfinite(segments_[i].g))
        throw ConfigError("coupling", "coupling g of segment " + std::to_string(i) + " is not finite");
      if (std::isnan(segments_[i].t_end))
        throw ConfigError("coupling", "coupling t_end of segment " + std::to_string(i) + " is NaN");
      if (i > 0 && !(segments_[i].t_end > segments_[i - 1].t_end))
        throw ConfigError("coupling", "coupling t_end values must be strictly increasing");
      if (i + 1 < segments_.size() && !std::isfinite(segments_[i].t_end))
        throw ConfigError("coupling", "only the final coupling segment may extend to infinity");
    }
    if (segments_.front().t_end <= 0.0)
      throw ConfigError("coupling", "first coupling segment must end after t = 0");
    if (std::isfinite(segments_.back().t_end))
      throw ConfigError("coupling", "final coupling segment must have t_end = infinity");
  }

  [[nodiscard]] double at(double t) const noexcept {
    for (const auto& s : segments_)
      if (t < s.t_end) return s.g;
    return segments_.back().g;
  }

  // Integral of g from 0 to t (t >= 0). Replaces g*t in closed-form results.
  [[nodiscard]] double integral(double t) const noexcept {
    double acc = 0.0;
    double start = 0.0;
    for (const auto& s : segments_) {
      const double end = std::min(t, s.t_end);
      if (end > start) acc += s.g * (end - start);
      if (t <= s.t_end) break;
      start = s.t_end;
    }
    return acc;
  }

  // Finite breakpoints in increasing order.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& s : segments_)
      if (std::isfinite(s.t_end)) out.push_back(s.t_end);
    return out;
  }

  // Length of the shortest finite segment (infinity if g is constant).
  [[nodiscard]] double shortest_segment() const noexcept {
    double shortest = kInf;
    double start = 0.0;
    for (const auto& s : segments_) {
      if (std::isfinite(s.t_end)) shortest = std::min(shortest, s.t_end - start);
      start = s.t_end;
    }
    return shortest;
  }

  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }

  friend bool operator==(const CouplingSchedule&, const CouplingSchedule&) = default;

 private:
  std::vector<Segment> segments_;
};

struct SystemParams {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double chi_a = 1.0;
  double chi_b = 1.0;
  CouplingSchedule coupling = CouplingSchedule::constant(1.0);

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

enum class Method { hybrid, hybrid_truncated, positive_p, wigner };

inline std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::hybrid: return "hybrid";
    case Method::hybrid_truncated: return "hybrid_truncated";
    case Method::positive_p: return "positive_p";
    case Method::wigner: return "wigner";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::hybrid, Method::hybrid_truncated, Method::positive_p, Method::wigner})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

// Representation tag per mode: 1 = positive-P (normal ordering),
// 2 = Wigner (symmetric ordering).
enum class Rep : int { positive_p = 1, wigner = 2 };

// Method plus its per-mode representation tags. The tags are derived from the
// method, so an inconsistent pair cannot be constructed.
class MethodSpec {
 public:
  explicit MethodSpec(Method method) noexcept : method_(method) {}

  [[nodiscard]] Method method() const noexcept { return method_; }

  [[nodiscard]] Rep r_a() const noexcept {
    return method_ == Method::positive_p ? Rep::positive_p : Rep::wigner;
  }
  [[nodiscard]] Rep r_b() const noexcept {
    return method_ == Method::wigner ? Rep::wigner : Rep::positive_p;
  }

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;

 private:
  Method method_;
};

// How a single time step is advanced. All schemes are Ito-consistent; the
// exponential variant applies the drift as an exact phase rotation after the
// noise increment, which keeps alpha+ alpha invariant under the hybrid drift.
// log_euler steps ln z and so conserves alpha+ alpha exactly under the hybrid
// noise as well.
enum class StepScheme { exponential_euler, explicit_euler, log_euler };

inline std::string_view to_string(StepScheme s) noexcept {
  switch (s) {
    case StepScheme::explicit_euler: return "explicit_euler";
    case StepScheme::log_euler: return "log_euler";
    case StepScheme::exponential_euler: break;
  }
  return "exponential_euler";
}

inline std::optional<StepScheme> parse_scheme(std::string_view name) noexcept {
  if (name == "exponential_euler") return StepScheme::exponential_euler;
  if (name == "explicit_euler") return StepScheme::explicit_euler;
  if (name == "log_euler") return StepScheme::log_euler;
  return std::nullopt;
}

inline constexpr double kDefaultBlowupScale = 1.0e6;

struct EnsembleConfig {
  std::uint64_t n_trajectories = 10000;
  std::uint64_t n_batches = 10;
  double dt = 1.0e-4;
  double t_final = 0.2;
  std::uint64_t sample_interval = 10;
  std::uint64_t master_seed = 1;
  double N_a0 = 100.0;
  double N_b0 = 0.01;
  // Absolute magnitude beyond which a trajectory is declared blown up. Unset
  // means kDefaultBlowupScale * max(1, sqrt(N_a0)).
  std::optional<double> blowup_threshold;
  StepScheme scheme = StepScheme::exponential_euler;

  [[nodiscard]] double resolved_blowup_threshold() const noexcept {
    return blowup_threshold.value_or(kDefaultBlowupScale * std::max(1.0, std::sqrt(N_a0)));
  }

  friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

// A configuration that passed validate_config.
struct RunDescriptor {
  MethodSpec method;
  SystemParams params;
  EnsembleConfig config;
};

struct Violation {
  std::string field;
  std::string message;
};

// Returns every violated invariant (empty when the configuration is valid).
inline std::vector<Violation> check_config(const EnsembleConfig& c, const SystemParams& p) {
  std::vector<Violation> out;
  auto finite = [&](const char* name, double v) {
    if (!std::isfinite(v)) out.push_back({name, std::string(name) + " must be finite"});
  };
  finite("omega_a", p.omega_a);
  finite("omega_b", p.omega_b);
  finite("chi_a", p.chi_a);
  finite("chi_b", p.chi_b);
  for (const auto& s : p.coupling.segments())
    if (!std::isfinite(s.g)) out.push_back({"coupling", "coupling g values must be finite"});

  if (c.n_trajectories == 0) out.push_back({"n_trajectories", "n_trajectories must be positive"});
  if (c.n_batches == 0) out.push_back({"n_batches", "n_batches must be positive"});
  if (c.n_trajectories > 0 && c.n_batches > 0 && c.n_trajectories % c.n_batches != 0)
    out.push_back({"n_batches", "n_batches must divide n_trajectories"});
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) out.push_back({"dt", "dt must be a positive finite number"});
  if (!(c.t_final >= 0.0) || !std::isfinite(c.t_final))
    out.push_back({"t_final", "t_final must be a non-negative finite number"});
  if (c.sample_interval == 0) out.push_back({"sample_interval", "sample_interval must be positive"});
  if (!(c.N_a0 >= 0.0) || !std::isfinite(c.N_a0)) out.push_back({"N_a0", "N_a0 must be a non-negative finite number"});
  if (!(c.N_b0 >= 0.0) || !std::isfinite(c.N_b0)) out.push_back({"N_b0", "N_b0 must be a non-negative finite number"});
  if (c.blowup_threshold && !(*c.blowup_threshold > 0.0))
    out.push_back({"blowup_threshold", "blowup_threshold must be positive"});
  if (c.dt > 0.0 && c.dt > p.coupling.shortest_segment())
    out.push_back({"dt", "dt must not exceed the shortest coupling segment"});
  return out;
}

// Validates and bundles a run. Throws ConfigError naming the first violated
// field; the message lists every violation.
inline RunDescriptor validate_config(const EnsembleConfig& config, MethodSpec method, const SystemParams& params) {
  const auto violations = check_config(config, params);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) {
      if (!msg.empty()) msg += "; ";
      msg += v.field + ": " + v.message;
    }
    throw ConfigError(violations.front().field, msg);
  }
  return RunDescriptor{method, params, config};
}

}  // namespace hybridps
