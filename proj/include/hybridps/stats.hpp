#pragma once

// Observable time series with batch-means error bars, and breakdown
// detection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridps/core.hpp"
#include "hybridps/integrator.hpp"
#include "hybridps/oracle.hpp"
#include "hybridps/representations.hpp"

namespace hybridps::stats {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MeanSE {
  double mean;
  double stderr_;
};

// Mean of B batch values and the standard error sd / sqrt(B) (sample sd).
inline MeanSE batch_mean_se(std::span<const double> batches) {
  const auto B = batches.size();
  if (B < 2) throw std::invalid_argument("batch_mean_se needs at least 2 batches");
  double mean = 0.0;
  for (double v : batches) mean += v;
  mean /= static_cast<double>(B);
  double ss = 0.0;
  for (double v : batches) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(B - 1));
  return {mean, sd / std::sqrt(static_cast<double>(B))};
}

struct ObservableSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<std::optional<double>> exact;
  std::vector<double> live_fraction;
  // First sample time with live_fraction < 1; error bars are unreliable from
  // there on.
  std::optional<double> unreliable_from;
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

inline const std::vector<std::string>& observable_names() {
  static const std::vector<std::string> names = {"X_a", "Y_a",  "X_b",  "Y_b", "N_a",
                                                 "N_b", "V_Na", "V_Yb", "NaYb", "C"};
  return names;
}

inline bool is_observable(std::string_view name) {
  const auto& n = observable_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

inline oracle::OracleParams oracle_params(const RunDescriptor& run) {
  return {run.params, run.config.N_a0, run.config.N_b0};
}

// Closed-form value of a named observable; every listed observable has one.
inline double exact_value(std::string_view name, double t, const oracle::OracleParams& p) {
  using namespace oracle;
  if (name == "X_a") return exact_quadratures_a(t, p).x;
  if (name == "Y_a") return exact_quadratures_a(t, p).y;
  if (name == "X_b") return exact_quadratures_b(t, p).x;
  if (name == "Y_b") return exact_quadratures_b(t, p).y;
  if (name == "N_a") return exact_number_a(p);
  if (name == "N_b") return exact_number_b(p);
  if (name == "V_Na") return exact_var_Na(p);
  if (name == "V_Yb") return exact_var_Yb(t, p);
  if (name == "NaYb") return exact_NaYb(t, p);
  if (name == "C") return exact_correlation(t, p);
  throw std::invalid_argument("unknown observable '" + std::string(name) + "'");
}

namespace detail {

// Estimator for one batch; NaN marks a batch to exclude.
inline double estimate(std::string_view name, const RawMoments& m, MethodSpec method) {
  using namespace representations;
  const Rep ra = method.r_a();
  const Rep rb = method.r_b();
  if (name == "X_a") return estimate_quadratures(m, Mode::a).x;
  if (name == "Y_a") return estimate_quadratures(m, Mode::a).y;
  if (name == "X_b") return estimate_quadratures(m, Mode::b).x;
  if (name == "Y_b") return estimate_quadratures(m, Mode::b).y;
  if (name == "N_a") return estimate_number(m, Mode::a, ra);
  if (name == "N_b") return estimate_number(m, Mode::b, rb);
  if (name == "V_Na") return estimate_number_variance(m, ra);
  if (name == "V_Yb") return estimate_Yb_variance(m, rb);
  if (name == "NaYb") return estimate_NaYb(m, ra);
  if (name == "C") {
    const double va = estimate_number_variance(m, ra);
    const double vy = estimate_Yb_variance(m, rb);
    if (!(va > 0.0) || !(vy > 0.0)) return kNaN;
    const double cov = estimate_NaYb(m, ra) - estimate_number(m, Mode::a, ra) * estimate_quadratures(m, Mode::b).y;
    return cov / (std::sqrt(va) * std::sqrt(vy));
  }
  throw std::invalid_argument("unknown observable '" + std::string(name) + "'");
}

inline std::optional<double> imaginary_residue(std::string_view name, const RawMoments& m) {
  using representations::imaginary_residue_quadrature;
  if (name == "X_a") return imaginary_residue_quadrature(m, Mode::a, false);
  if (name == "Y_a") return imaginary_residue_quadrature(m, Mode::a, true);
  if (name == "X_b") return imaginary_residue_quadrature(m, Mode::b, false);
  if (name == "Y_b") return imaginary_residue_quadrature(m, Mode::b, true);
  if (name == "N_a") return m.n_a.imag();
  if (name == "N_b") return m.n_b.imag();
  return std::nullopt;
}

}  // namespace detail

// Applies the named estimator batch by batch, then combines batches. Batches
// with no live trajectory, or whose estimate is undefined (a non-positive
// variance inside C), are excluded and reported in `diagnostics`.
inline ObservableSeries observable_series(const EnsembleResult& result, const RunDescriptor& run,
                                          std::string_view name) {
  if (!is_observable(name)) throw std::invalid_argument("unknown observable '" + std::string(name) + "'");
  const auto op = oracle_params(run);
  ObservableSeries out;
  out.name = std::string(name);
  out.times = result.times;
  out.live_fraction = result.live_fraction;
  const std::size_t ns = result.n_samples();
  out.mean.assign(ns, kNaN);
  out.stderr_.assign(ns, kNaN);
  out.exact.resize(ns);
  bool warned_imag = false;
  std::vector<double> values;
  std::vector<double> imag;
  for (std::size_t s = 0; s < ns; ++s) {
    out.exact[s] = exact_value(name, result.times[s], op);
    if (!out.unreliable_from && result.live_fraction[s] < 1.0) out.unreliable_from = result.times[s];
    values.clear();
    imag.clear();
    std::size_t excluded = 0;
    for (std::size_t b = 0; b < result.n_batches; ++b) {
      if (result.live(s, b) == 0) {
        ++excluded;
        continue;
      }
      const auto m = result.batch_mean(s, b);
      const double v = detail::estimate(name, m, run.method);
      if (!std::isfinite(v)) {
        ++excluded;
        continue;
      }
      values.push_back(v);
      if (auto im = detail::imaginary_residue(name, m)) imag.push_back(*im);
    }
    if (excluded > 0)
      out.diagnostics.push_back("t=" + std::to_string(result.times[s]) + ": " + std::to_string(excluded) +
                                " batch(es) excluded");
    if (values.size() < 2) continue;
    const auto ms = batch_mean_se(values);
    out.mean[s] = ms.mean;
    out.stderr_[s] = ms.stderr_;
    if (!warned_imag && imag.size() >= 2) {
      const auto im = batch_mean_se(imag);
      if (std::fabs(im.mean) / (std::fabs(ms.mean) + 1.0) > 10.0 * im.stderr_ && im.stderr_ > 0.0) {
        out.diagnostics.push_back("t=" + std::to_string(result.times[s]) +
                                  ": imaginary part exceeds 10x its standard error");
        warned_imag = true;
      }
    }
  }
  return out;
}

// C(N_a, Y_b) assembled per batch from the ordering-correct estimators.
inline ObservableSeries correlation_series(const EnsembleResult& result, const RunDescriptor& run) {
  return observable_series(result, run, "C");
}

struct BlowupOptions {
  std::size_t window = 20;
  std::size_t min_history = 5;
  double factor = 10.0;
  double min_live_fraction = 0.999;
};

// Earliest sample time at which the error bar jumps above `factor` times its
// median over the preceding `window` samples (or stops being finite), or at
// which the live fraction drops below `min_live_fraction`. The jump test needs
// at least `min_history` earlier samples.
inline std::optional<double> detect_blowup(const ObservableSeries& series, const BlowupOptions& opt = {}) {
  std::vector<double> hist;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i < series.live_fraction.size() && series.live_fraction[i] < opt.min_live_fraction) return series.times[i];
    const double se = series.stderr_[i];
    if (i > 0 && !std::isfinite(se)) return series.times[i];
    if (i < opt.min_history) continue;
    const std::size_t lo = i > opt.window ? i - opt.window : 0;
    hist.assign(series.stderr_.begin() + static_cast<std::ptrdiff_t>(lo),
                series.stderr_.begin() + static_cast<std::ptrdiff_t>(i));
    std::sort(hist.begin(), hist.end());
    const std::size_t h = hist.size();
    const double median = h % 2 == 1 ? hist[h / 2] : 0.5 * (hist[h / 2 - 1] + hist[h / 2]);
    if (median > 0.0 && se > opt.factor * median) return series.times[i];
  }
  return std::nullopt;
}

}  // namespace hybridps::stats
