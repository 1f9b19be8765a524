#pragma once

// Brute-force simulation of first passages, weighted occupation times and the
// Parisian clock. Each path draws from its own stream, blocks of paths are
// reduced with a fixed pairwise tree, so estimates don't depend on the number
// of threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "snlp/errors.hpp"
#include "snlp/levy_model.hpp"
#include "snlp/occupation.hpp"
#include "snlp/parisian.hpp"
#include "snlp/quadrature.hpp"
#include "snlp/rng.hpp"

namespace snlp {

enum class PathScheme { gaussian_grid, event_driven_cl };

inline std::string to_string(PathScheme s) {
  return s == PathScheme::gaussian_grid ? "gaussian_grid" : "event_driven_cl";
}

inline PathScheme parse_path_scheme(const std::string& s) {
  if (s == "gaussian_grid" || s == "grid") return PathScheme::gaussian_grid;
  if (s == "event_driven_cl" || s == "event") return PathScheme::event_driven_cl;
  throw ValidationError("unknown path scheme '" + s + "' (expected gaussian_grid or event_driven_cl)");
}

struct PathConfig {
  PathScheme scheme = PathScheme::gaussian_grid;
  double dt = 1e-4;
  double horizon = 50.0;  // paths still running are extended to 4x this, then censored
  std::uint64_t base_seed = 7;
  long long n_paths = 100000;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (scheme == PathScheme::gaussian_grid && (!(dt > 0.0) || !std::isfinite(dt)))
      throw ValidationError("montecarlo: dt must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("montecarlo: horizon must be > 0");
    if (n_paths <= 0) throw ValidationError("montecarlo: n_paths must be > 0");
  }
};

enum class PathEvent { up, down, parisian, censored };

inline std::string to_string(PathEvent e) {
  switch (e) {
    case PathEvent::up: return "up";
    case PathEvent::down: return "down";
    case PathEvent::parisian: return "parisian";
    default: return "censored";
  }
}

struct PathOutcome {
  PathEvent event = PathEvent::censored;
  double event_time = 0.0;
  double clock_at_down = 0.0;
  double time_above = 0.0;  // O+ at the event
  double time_below = 0.0;  // O- at the event
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long n = 0;
  std::string bias_note = "none";
};

// What a single path needs to know. c = -inf and gamma = +inf switch the
// corresponding event off.
struct PathTask {
  double x = 0.0;
  double t0 = 0.0;
  double b = 1.0;
  double c = -1.0;
  double gamma = std::numeric_limits<double>::infinity();
};

// Uniform bins on [lo, hi) collecting int e^{-pt} 1(X_t in bin, l(t) <= r) dt.
struct Histogram {
  double lo = -1.0, hi = 1.0;
  int bins = 10;
  double p = 0.0;
  double r = std::numeric_limits<double>::infinity();

  void validate() const {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("histogram: need lo < hi");
    if (bins <= 0) throw ValidationError("histogram: bins must be > 0");
  }
  double width() const { return (hi - lo) / bins; }
  std::vector<double> edges() const {
    std::vector<double> e(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) e[i] = lo + i * width();
    return e;
  }
};

namespace detail {

// int_a^b e^{-pu} du
inline double discounted_length(double p, double a, double b) {
  if (p == 0.0) return b - a;
  return std::exp(-p * a) * -std::expm1(-p * (b - a)) / p;
}

struct HistogramAcc {
  const Histogram& h;
  std::span<double> acc;

  // Grid: state (y, clock) held over [t, t + dt).
  void hold(double y, double t, double clock, double dt) const {
    if (clock > h.r + 1e-12 || y < h.lo || y >= h.hi) return;
    const auto i = std::min(h.bins - 1, static_cast<int>((y - h.lo) / h.width()));
    acc[i] += std::exp(-h.p * t) * dt;
  }

  // Event-driven: y(u) = y0 + slope u for u in [0, dur], starting at time t.
  void segment(double t, double y0, double slope, double dur) const {
    if (!(dur > 0.0)) return;
    const double w = h.width();
    const double y1 = y0 + slope * dur;
    const int first = std::max(0, static_cast<int>(std::floor((std::min(y0, y1) - h.lo) / w)));
    const int last = std::min(h.bins - 1, static_cast<int>(std::floor((std::max(y0, y1) - h.lo) / w)));
    for (int i = first; i <= last; ++i) {
      const double e0 = h.lo + i * w, e1 = h.lo + (i + 1) * w;
      const double u0 = std::max(0.0, (e0 - y0) / slope), u1 = std::min(dur, (e1 - y0) / slope);
      if (u1 > u0) acc[i] += std::exp(-h.p * t) * discounted_length(h.p, u0, u1);
    }
  }
};

}  // namespace detail

// Euler grid for BrownianDrift. At each node: up if X >= b, then the clock
// (one more dt if X < 0, reset otherwise), then down if X < c, then Parisian
// ruin once the clock has run for gamma.
template <class Rng>
PathOutcome walk_grid(const BrownianDrift& bm, const PathTask& task, double dt, double max_time, Rng& rng,
                      const detail::HistogramAcc* hist = nullptr) {
  PathOutcome out;
  double X = task.x;
  if (X >= task.b) {
    out.event = PathEvent::up;
    return out;
  }
  if (X <= task.c) {
    out.event = PathEvent::down;
    out.clock_at_down = X < 0.0 ? task.t0 : 0.0;
    return out;
  }
  const long long n_gamma = std::isinf(task.gamma) ? std::numeric_limits<long long>::max()
                                                   : static_cast<long long>(std::ceil(task.gamma / dt - 1e-9));
  long long neg = X < 0.0 ? std::llround(task.t0 / dt) : 0;
  const long long max_steps = static_cast<long long>(std::ceil(max_time / dt));
  const double drift = bm.mu * dt, vol = bm.sigma * std::sqrt(dt);
  std::normal_distribution<double> normal;
  double above = 0.0, below = 0.0;
  for (long long k = 1; k <= max_steps; ++k) {
    if (hist) hist->hold(X, (k - 1) * dt, X < 0.0 ? neg * dt : 0.0, dt);
    const double Xn = X + drift + vol * normal(rng);
    if (X >= 0.0 && Xn >= 0.0) {
      above += dt;
    } else if (X < 0.0 && Xn < 0.0) {
      below += dt;
    } else {
      const double f = X / (X - Xn);  // fraction of the step before the sign change
      above += (X >= 0.0 ? f : 1.0 - f) * dt;
      below += (X >= 0.0 ? 1.0 - f : f) * dt;
    }
    X = Xn;
    out.event_time = k * dt;
    out.time_above = above;
    out.time_below = below;
    if (X >= task.b) {
      out.event = PathEvent::up;
      return out;
    }
    neg = X < 0.0 ? neg + 1 : 0;
    if (X < task.c) {
      out.event = PathEvent::down;
      out.clock_at_down = neg * dt;
      return out;
    }
    if (neg >= n_gamma) {
      out.event = PathEvent::parisian;
      return out;
    }
  }
  out.event = PathEvent::censored;
  return out;
}

// Jump stream for the event-driven scheme.
template <class Rng>
struct RandomJumps {
  Rng rng;
  std::exponential_distribution<double> wait, size;
  RandomJumps(Rng r, const CramerLundberg& cl) : rng(r), wait(cl.jump_rate), size(1.0 / cl.jump_mean) {}
  double interarrival() { return wait(rng); }
  double jump() { return size(rng); }
};

// Exact scheme for CramerLundberg: the path is linear with slope = premium
// between jumps, so passages above b, returns to 0 and the clock reaching gamma
// are solved in closed form. Down-crossings happen only at jumps.
template <class Source>
PathOutcome walk_event_driven(const CramerLundberg& cl, const PathTask& task, double max_time, Source& src,
                              const detail::HistogramAcc* hist = nullptr) {
  PathOutcome out;
  const double prem = cl.premium;
  double X = task.x, t = 0.0;
  double l = X < 0.0 ? task.t0 : 0.0;
  double above = 0.0, below = 0.0;
  auto finish = [&](PathEvent e) {
    out.event = t > max_time ? PathEvent::censored : e;
    out.event_time = t;
    out.time_above = above;
    out.time_below = below;
    return out;
  };
  if (X >= task.b) return finish(PathEvent::up);
  auto hist_seg = [&](double dur, bool negative) {
    if (!hist) return;
    if (negative) dur = std::min(dur, std::max(0.0, hist->h.r - l));
    hist->segment(t, X, prem, dur);
  };
  while (t <= max_time) {
    double tau = src.interarrival();
    while (tau > 0.0) {
      if (X >= 0.0) {
        const double hit = (task.b - X) / prem;
        if (hit <= tau) {
          hist_seg(hit, false);
          t += hit;
          above += hit;
          return finish(PathEvent::up);
        }
        hist_seg(tau, false);
        X += prem * tau;
        t += tau;
        above += tau;
        tau = 0.0;
      } else {
        const double to0 = -X / prem, tog = task.gamma - l;
        if (tog <= tau && tog <= to0) {
          hist_seg(tog, true);
          t += tog;
          below += tog;
          return finish(PathEvent::parisian);
        }
        if (to0 <= tau) {
          hist_seg(to0, true);
          t += to0;
          below += to0;
          tau -= to0;
          X = 0.0;
          l = 0.0;
          continue;
        }
        hist_seg(tau, true);
        X += prem * tau;
        t += tau;
        l += tau;
        below += tau;
        tau = 0.0;
      }
    }
    const bool was_negative = X < 0.0;
    X -= src.jump();
    if (X < 0.0 && !was_negative) l = 0.0;
    if (X < task.c) {
      out.clock_at_down = l;
      return finish(PathEvent::down);
    }
  }
  return finish(PathEvent::censored);
}

namespace detail {

inline constexpr long long kBlock = 256;

struct Sums {
  std::vector<double> sum, sumsq;
  long long censored = 0;
};

// fn(index, out) fills out (zeros on entry) and returns true if the path was censored.
template <class PathFn>
Sums run_paths(long long n, unsigned threads, std::size_t dims, PathFn&& fn) {
  const long long nblocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> bsum(nblocks), bsq(nblocks);
  std::vector<long long> bcens(nblocks, 0);
  std::atomic<long long> next{0};
  auto worker = [&] {
    std::vector<double> vals(dims * kBlock), sq(kBlock), out(dims);
    for (long long blk = next++; blk < nblocks; blk = next++) {
      const long long lo = blk * kBlock, hi = std::min(n, lo + kBlock);
      const long long m = hi - lo;
      for (long long i = lo; i < hi; ++i) {
        std::fill(out.begin(), out.end(), 0.0);
        if (fn(i, std::span<double>(out))) ++bcens[blk];
        for (std::size_t d = 0; d < dims; ++d) vals[d * kBlock + (i - lo)] = out[d];
      }
      bsum[blk].resize(dims);
      bsq[blk].resize(dims);
      for (std::size_t d = 0; d < dims; ++d) {
        std::span<const double> v(vals.data() + d * kBlock, static_cast<std::size_t>(m));
        for (long long j = 0; j < m; ++j) sq[j] = v[j] * v[j];
        bsum[blk][d] = pairwise_sum(v);
        bsq[blk][d] = pairwise_sum(std::span<const double>(sq.data(), static_cast<std::size_t>(m)));
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long long>(threads, nblocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Sums s;
  s.sum.resize(dims);
  s.sumsq.resize(dims);
  std::vector<double> col(nblocks);
  for (std::size_t d = 0; d < dims; ++d) {
    for (long long b = 0; b < nblocks; ++b) col[b] = bsum[b][d];
    s.sum[d] = pairwise_sum(std::span<const double>(col));
    for (long long b = 0; b < nblocks; ++b) col[b] = bsq[b][d];
    s.sumsq[d] = pairwise_sum(std::span<const double>(col));
  }
  for (long long c : bcens) s.censored += c;
  return s;
}

inline MCEstimate estimate(const Sums& s, std::size_t d, long long n, const std::string& note) {
  MCEstimate e;
  e.n = n;
  e.bias_note = note;
  e.mean = s.sum[d] / n;
  if (n > 1) {
    const double var = std::max(0.0, (s.sumsq[d] - n * e.mean * e.mean) / (n - 1));
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

inline void check_censoring(const Sums& s, long long n) {
  if (s.censored > n / 100)
    throw NumericalError("montecarlo: " + std::to_string(s.censored) + " of " + std::to_string(n) +
                         " paths were still running at 4x the horizon; increase the horizon");
}

inline std::string bias_note(const PathConfig& cfg) {
  return cfg.scheme == PathScheme::gaussian_grid ? "discretization O(sqrt(dt))" : "none";
}

// Runs one path of the configured scheme.
inline PathOutcome simulate_one(const LevyModel& model, const PathTask& task, const PathConfig& cfg,
                                long long index, const HistogramAcc* hist = nullptr) {
  const double max_time = 4.0 * cfg.horizon;
  auto rng = path_rng(cfg.base_seed, static_cast<std::uint64_t>(index));
  if (cfg.scheme == PathScheme::gaussian_grid) return walk_grid(*model.brownian_spec(), task, cfg.dt, max_time, rng, hist);
  RandomJumps<Xoshiro256ss> src(rng, *model.cl_spec());
  return walk_event_driven(*model.cl_spec(), task, max_time, src, hist);
}

inline void check_scheme(const LevyModel& model, const PathConfig& cfg) {
  cfg.validate();
  if (cfg.scheme == PathScheme::gaussian_grid && !model.brownian_spec())
    throw CapabilityError("montecarlo: gaussian_grid simulates BrownianDrift only");
  if (cfg.scheme == PathScheme::event_driven_cl && !model.cl_spec())
    throw CapabilityError("montecarlo: event_driven_cl simulates CramerLundberg only");
}

inline void check_parisian(const ParisianQuery& pq, const PathConfig& cfg) {
  pq.validate();
  check_scheme(pq.model, cfg);
  if (cfg.scheme == PathScheme::gaussian_grid && cfg.dt > pq.gamma / 50.0)
    throw ValidationError("montecarlo: dt must be <= gamma/50 to resolve the Parisian clock");
}

inline PathTask parisian_task(const ParisianQuery& pq) { return {pq.x, pq.t0, pq.b, pq.c, pq.gamma}; }

}  // namespace detail

// One path of a Parisian query, for inspection.
inline PathOutcome simulate_parisian_path(const ParisianQuery& pq, const PathConfig& cfg, long long index) {
  detail::check_parisian(pq, cfg);
  return detail::simulate_one(pq.model, detail::parisian_task(pq), cfg, index);
}

struct ParisianEstimates {
  MCEstimate up, ruin_raw, ruin_shifted, down;
  long long censored = 0;
};

// Discounted indicators of tau_b+ < tau_c- ^ tau_gamma, of Parisian ruin
// (both e^{-p tau} and e^{-p (tau - gamma)}) and of tau_c- < tau_b+ ^ tau_gamma
// with l(tau_c-) <= r.
inline ParisianEstimates simulate_parisian(const ParisianQuery& pq, const PathConfig& cfg) {
  detail::check_parisian(pq, cfg);
  const auto task = detail::parisian_task(pq);
  auto s = detail::run_paths(cfg.n_paths, cfg.threads, 4, [&](long long i, std::span<double> out) {
    const auto o = detail::simulate_one(pq.model, task, cfg, i);
    const double disc = std::exp(-pq.p * o.event_time);
    switch (o.event) {
      case PathEvent::up: out[0] = disc; break;
      case PathEvent::parisian:
        out[1] = disc;
        out[2] = std::exp(-pq.p * (o.event_time - pq.gamma));
        break;
      case PathEvent::down:
        if (o.clock_at_down <= pq.r + 1e-12) out[3] = disc;
        break;
      case PathEvent::censored: return true;
    }
    return false;
  });
  detail::check_censoring(s, cfg.n_paths);
  const auto note = detail::bias_note(cfg);
  return {detail::estimate(s, 0, cfg.n_paths, note), detail::estimate(s, 1, cfg.n_paths, note),
          detail::estimate(s, 2, cfg.n_paths, note), detail::estimate(s, 3, cfg.n_paths, note), s.censored};
}

struct OccupationEstimates {
  MCEstimate up, down;
  long long censored = 0;
};

// E_x[e^{-(p O+ + q O-)(tau)}] on each exit event of (c, b).
inline OccupationEstimates simulate_occupation_exit(const OccupationQuery& oq, const PathConfig& cfg) {
  oq.validate();
  detail::check_scheme(oq.model, cfg);
  const PathTask task{oq.x, 0.0, oq.b, oq.c, std::numeric_limits<double>::infinity()};
  auto s = detail::run_paths(cfg.n_paths, cfg.threads, 2, [&](long long i, std::span<double> out) {
    const auto o = detail::simulate_one(oq.model, task, cfg, i);
    const double disc = std::exp(-(oq.p * o.time_above + oq.q * o.time_below));
    if (o.event == PathEvent::up) out[0] = disc;
    if (o.event == PathEvent::down) out[1] = disc;
    return o.event == PathEvent::censored;
  });
  detail::check_censoring(s, cfg.n_paths);
  const auto note = detail::bias_note(cfg);
  return {detail::estimate(s, 0, cfg.n_paths, note), detail::estimate(s, 1, cfg.n_paths, note), s.censored};
}

struct HistogramEstimates {
  std::vector<double> edges;
  std::vector<MCEstimate> bins;  // estimates of int_bin u(y) dy
  long long censored = 0;
};

// Binned int_0^tau e^{-pt} 1(X_t in bin, l(t) <= r) dt with tau the first of
// tau_b+, tau_c-, tau_gamma. Bins default to (c, b) when lo/hi are left equal.
inline HistogramEstimates simulate_resolvent_histogram(const ParisianQuery& pq, Histogram h, const PathConfig& cfg) {
  detail::check_parisian(pq, cfg);
  h.p = pq.p;
  h.r = pq.r;
  h.validate();
  const auto task = detail::parisian_task(pq);
  auto s = detail::run_paths(cfg.n_paths, cfg.threads, static_cast<std::size_t>(h.bins),
                             [&](long long i, std::span<double> out) {
                               detail::HistogramAcc acc{h, out};
                               const auto o = detail::simulate_one(pq.model, task, cfg, i, &acc);
                               return o.event == PathEvent::censored;
                             });
  detail::check_censoring(s, cfg.n_paths);
  HistogramEstimates out;
  out.edges = h.edges();
  out.censored = s.censored;
  const auto note = detail::bias_note(cfg);
  for (int i = 0; i < h.bins; ++i) out.bins.push_back(detail::estimate(s, static_cast<std::size_t>(i), cfg.n_paths, note));
  return out;
}

}  // namespace snlp
