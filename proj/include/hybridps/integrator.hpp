#pragma once

// Fixed-step Ito integration of trajectory ensembles.
//
// Step rule (exponential_euler, the default):
//   z' = exp(rate(z) h) * (z + B(z) xi sqrt(h))
// which agrees with Euler-Maruyama, z' = z + A(z) h + B(z) xi sqrt(h), up to
// O(h^{3/2}) mean-zero and O(h^2) terms. Under the hybrid equations the
// rotation factors of alpha and alpha+ cancel exactly in alpha+ alpha.
// Every noise entry is z_i times a constant, B(z) = diag(z) K, which the
// log_euler option uses to step ln z instead (with its Ito correction).
//
// Trajectory i draws from stream (master_seed, i) and belongs to batch
// i mod n_batches. Batches are accumulated in ascending trajectory order by a
// single worker each, so results do not depend on the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "hybridps/core.hpp"
#include "hybridps/dynamics.hpp"
#include "hybridps/representations.hpp"
#include "hybridps/rng.hpp"

namespace hybridps {

struct TrajectoryState {
  PhasePoint point;
  bool live = true;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
};

// One step of length h starting at time t0. `xi` holds the standard normal
// draws for the method's noise columns.
inline void euler_maruyama_step(TrajectoryState& state, const dynamics::Equations& eq, double t0, double h,
                                const std::array<double, 4>& xi, double blowup_threshold,
                                StepScheme scheme = StepScheme::exponential_euler) noexcept {
  if (!state.live) return;
  const PhasePoint& p = state.point;
  const auto rates = eq.rates(p);
  // kappa_i = sum_n K[i][n] xi_n sqrt(h), so that B(z) xi sqrt(h) = z * kappa.
  std::array<cplx, 4> kappa{};
  if (eq.noise_count() > 0) {
    const auto& k = eq.noise_coefficients();
    const double sh = std::sqrt(h);
    for (int i = 0; i < 4; ++i) {
      for (int n = 0; n < 4; ++n) kappa[i] += k[i][n] * xi[n];
      kappa[i] *= sh;
    }
  }
  PhasePoint next;
  for (std::size_t i = 0; i < PhasePoint::size; ++i) {
    const cplx z = p[i];
    switch (scheme) {
      case StepScheme::exponential_euler: next[i] = std::exp(rates[i] * h) * z * (1.0 + kappa[i]); break;
      case StepScheme::explicit_euler: next[i] = z * (1.0 + rates[i] * h + kappa[i]); break;
      case StepScheme::log_euler:
        next[i] = z * std::exp((rates[i] - 0.5 * eq.ito_correction()[i]) * h + kappa[i]);
        break;
    }
  }
  if (eq.method() == Method::wigner) {
    next.alpha_plus = std::conj(next.alpha);
    next.beta_plus = std::conj(next.beta);
  }
  if (!next.finite() || next.max_abs() > blowup_threshold) {
    state.live = false;
    state.blowup_time = t0 + h;
    return;
  }
  state.point = next;
}

inline void euler_maruyama_step(TrajectoryState& state, const dynamics::Equations& eq, double t0, double h,
                                rng::TrajectoryStream& stream, double blowup_threshold,
                                StepScheme scheme = StepScheme::exponential_euler) noexcept {
  std::array<double, 4> xi{};
  for (int n = 0; n < eq.noise_count(); ++n) xi[n] = stream.normal();
  euler_maruyama_step(state, eq, t0, h, xi, blowup_threshold, scheme);
}

// Step layout shared by every trajectory of a run. Steps never straddle a
// coupling breakpoint or t_final: the step that would cross one is shortened
// to land on it.
struct TimeGrid {
  struct Step {
    double t0;
    double h;
    std::size_t segment;  // index into `couplings`
    bool sample_after;
  };

  std::vector<Step> steps;
  std::vector<double> sample_times;  // includes t = 0
  std::vector<double> couplings;     // g per distinct segment, in order

  static TimeGrid build(const EnsembleConfig& c, const CouplingSchedule& schedule) {
    TimeGrid grid;
    grid.sample_times.push_back(0.0);
    std::vector<double> ends;
    for (double b : schedule.breakpoints())
      if (b > 0.0 && b < c.t_final) ends.push_back(b);
    ends.push_back(c.t_final);

    std::uint64_t count = 0;
    double start = 0.0;
    for (std::size_t seg = 0; seg < ends.size(); ++seg) {
      const double end = ends[seg];
      grid.couplings.push_back(schedule.at(start));
      if (end <= start) continue;
      const auto n = static_cast<std::uint64_t>(std::ceil((end - start) / c.dt - 1e-9));
      for (std::uint64_t k = 0; k < n; ++k) {
        const double t0 = start + static_cast<double>(k) * c.dt;
        const double t1 = k + 1 == n ? end : start + static_cast<double>(k + 1) * c.dt;
        ++count;
        const bool last = seg + 1 == ends.size() && k + 1 == n;
        const bool sample = count % c.sample_interval == 0 || last;
        grid.steps.push_back({t0, t1 - t0, grid.couplings.size() - 1, sample});
        if (sample) grid.sample_times.push_back(t1);
      }
      start = end;
    }
    return grid;
  }
};

// Per-sample monomials of one trajectory; entries after blow-up are unset.
struct TrajectoryRecord {
  std::vector<RawMoments> samples;
  std::vector<bool> live;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
};

// Runs one trajectory and hands (sample index, point, live) to `sink` at
// every sample time.
template <class Sink>
void run_trajectory(const RunDescriptor& run, const TimeGrid& grid,
                    const std::vector<dynamics::Equations>& equations, std::uint64_t index, Sink&& sink) {
  rng::TrajectoryStream stream(run.config.master_seed, index);
  const auto init = CoherentInit::from_occupations(run.config.N_a0, run.config.N_b0);
  TrajectoryState state{representations::sample_initial(init, run.method, stream)};
  const double threshold = run.config.resolved_blowup_threshold();
  std::size_t sample = 0;
  sink(sample++, state);
  for (const auto& step : grid.steps) {
    euler_maruyama_step(state, equations[step.segment], step.t0, step.h, stream, threshold, run.config.scheme);
    if (step.sample_after) sink(sample++, state);
  }
}

inline std::vector<dynamics::Equations> equations_for(const RunDescriptor& run, const TimeGrid& grid) {
  std::vector<dynamics::Equations> eqs;
  eqs.reserve(grid.couplings.size());
  for (double g : grid.couplings) eqs.emplace_back(run.method.method(), run.params, g);
  return eqs;
}

inline TrajectoryRecord simulate_trajectory(const RunDescriptor& run, std::uint64_t index) {
  const auto grid = TimeGrid::build(run.config, run.params.coupling);
  const auto eqs = equations_for(run, grid);
  TrajectoryRecord rec;
  rec.samples.resize(grid.sample_times.size());
  rec.live.resize(grid.sample_times.size(), false);
  TrajectoryState last;
  run_trajectory(run, grid, eqs, index, [&](std::size_t s, const TrajectoryState& st) {
    if (st.live) rec.samples[s] = RawMoments::of(st.point);
    rec.live[s] = st.live;
    last = st;
  });
  rec.blowup_time = last.blowup_time;
  return rec;
}

// Batch-structured sums of the raw monomials at every sample time.
struct EnsembleResult {
  using Sums = std::array<cplx, RawMoments::count>;

  std::vector<double> times;
  std::uint64_t n_trajectories = 0;
  std::uint64_t n_batches = 0;
  std::vector<Sums> sums;                 // [sample * n_batches + batch]
  std::vector<std::uint64_t> live_count;  // same layout
  std::vector<double> live_fraction;      // per sample
  std::vector<double> blowup_times;       // one entry per blown-up trajectory, ascending

  [[nodiscard]] std::size_t n_samples() const noexcept { return times.size(); }
  [[nodiscard]] std::uint64_t batch_size() const noexcept { return n_trajectories / n_batches; }

  [[nodiscard]] std::uint64_t live(std::size_t sample, std::size_t batch) const noexcept {
    return live_count[sample * n_batches + batch];
  }

  // Mean monomials of one batch's live trajectories.
  [[nodiscard]] RawMoments batch_mean(std::size_t sample, std::size_t batch) const noexcept {
    const auto& s = sums[sample * n_batches + batch];
    const auto n = static_cast<double>(live(sample, batch));
    Sums m{};
    if (n > 0)
      for (std::size_t k = 0; k < m.size(); ++k) m[k] = s[k] / n;
    return RawMoments::from_array(m);
  }
};

inline std::size_t default_worker_count() noexcept {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

inline EnsembleResult run_ensemble(const RunDescriptor& run, std::size_t workers = default_worker_count()) {
  const auto& c = run.config;
  const auto grid = TimeGrid::build(c, run.params.coupling);
  const auto eqs = equations_for(run, grid);

  EnsembleResult res;
  res.times = grid.sample_times;
  res.n_trajectories = c.n_trajectories;
  res.n_batches = c.n_batches;
  const std::size_t ns = res.times.size();
  res.sums.assign(ns * c.n_batches, EnsembleResult::Sums{});
  res.live_count.assign(ns * c.n_batches, 0);
  std::vector<std::vector<double>> blowups(c.n_batches);

  std::atomic<std::uint64_t> next_batch{0};
  auto worker = [&] {
    for (std::uint64_t b = next_batch++; b < c.n_batches; b = next_batch++) {
      for (std::uint64_t i = b; i < c.n_trajectories; i += c.n_batches) {
        TrajectoryState last;
        run_trajectory(run, grid, eqs, i, [&](std::size_t s, const TrajectoryState& st) {
          last = st;
          if (!st.live) return;
          const auto m = RawMoments::of(st.point).as_array();
          auto& acc = res.sums[s * c.n_batches + b];
          for (std::size_t k = 0; k < m.size(); ++k) acc[k] += m[k];
          ++res.live_count[s * c.n_batches + b];
        });
        if (!last.live) blowups[b].push_back(last.blowup_time);
      }
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, c.n_batches);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  res.live_fraction.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    std::uint64_t live = 0;
    for (std::uint64_t b = 0; b < c.n_batches; ++b) live += res.live(s, b);
    res.live_fraction[s] = static_cast<double>(live) / static_cast<double>(c.n_trajectories);
  }
  for (const auto& v : blowups) res.blowup_times.insert(res.blowup_times.end(), v.begin(), v.end());
  std::sort(res.blowup_times.begin(), res.blowup_times.end());
  return res;
}

}  // namespace hybridps
