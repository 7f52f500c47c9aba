#include "covertime/walk.hpp"

#include <algorithm>

namespace covertime {

std::vector<i64> box_sites(const TorusGeometry& g, const Pt& center, i32 r) {
  if (r < 0) fail(Errc::ConfigInvalid, "box radius must be >= 0");
  if (2 * r + 1 > g.N) fail(Errc::DegenerateScale, "box side exceeds torus side");
  std::vector<i64> out;
  const i32 side = 2 * r + 1;
  i64 n = 1;
  for (int i = 0; i < g.d; ++i) n *= side;
  out.reserve(std::size_t(n));
  Pt p{};
  for (i64 code = 0; code < n; ++code) {
    i64 c = code;
    for (int i = g.d - 1; i >= 0; --i) {
      p[std::size_t(i)] = center[std::size_t(i)] - r + i32(c % side);
      c /= side;
    }
    out.push_back(g.index(p));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TorusWalker::TorusWalker(const MovingMode& mode, const TorusGeometry& geom)
    : mode_(mode), geom_(geom), alias_(mode.jump_prob) {
  if (mode.d != geom.d) fail(Errc::ConfigInvalid, "mode and torus dimension mismatch");
  njumps_ = int(mode.jumps.size());
  delta_.assign(std::size_t(njumps_) * geom.d, 0);
  for (int k = 0; k < njumps_; ++k)
    for (int i = 0; i < geom.d; ++i) delta_[std::size_t(k) * geom.d + i] = geom_.wrap(mode.jumps[std::size_t(k)][std::size_t(i)]);
}

template <bool kFast3>
void TorusWalker::run_impl(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng,
                           WalkResult& out) const {
  const int d = geom_.d;
  const i32 N = geom_.N;
  const i64 budget = opts.step_budget < 0 ? geom_.default_step_budget() : opts.step_budget;

  i64 horizon = -1;
  if (rule.kind == StopKind::FixedJumps) horizon = rule.jumps;
  if (rule.kind == StopKind::FixedTime) {
    if (!(rule.time >= 0.0)) fail(Errc::ConfigInvalid, "negative time horizon");
    horizon = rng.poisson(rule.time);
  }
  if (horizon >= 0 && horizon > budget)
    fail(Errc::StepBudgetExceeded, "horizon of " + std::to_string(horizon) + " jumps exceeds budget " +
                                       std::to_string(budget));

  out.start = geom_.canonical(start);
  out.end = out.start;
  out.jumpCount = 0;
  out.eventStep = -1;
  out.totalTime = 0.0;
  out.watchStep = -1;
  out.reason = StopReason::Completed;
  out.jumpSeq.clear();
  if (out.trace.volume != geom_.volume || out.trace.trackFirstHit != opts.track_first_hit)
    out.trace.init(geom_.volume, opts.track_first_hit);
  else
    out.trace.reset();

  const SiteMask* target = rule.target;
  i64 remaining = 0;
  if (rule.kind == StopKind::Coverage) {
    remaining = target ? target->count : geom_.volume;
    if (remaining == 0) fail(Errc::ConfigInvalid, "coverage target is empty");
  }
  if ((rule.kind == StopKind::HitSet || rule.kind == StopKind::ReturnSet) &&
      (!target || target->count == 0))
    fail(Errc::ConfigInvalid, "hit target is empty");

  Pt pos = out.start;
  i32 x = 0, y = 0, z = 0;
  if constexpr (kFast3) {
    x = pos[0];
    y = pos[1];
    z = pos[2];
  }
  i64 idx = geom_.index(pos);

  out.trace.visit(idx, 0);
  if (opts.watch_site >= 0 && idx == opts.watch_site) out.watchStep = 0;
  if (rule.kind == StopKind::Coverage) {
    if (!target || target->test(idx)) --remaining;
    if (remaining == 0) {
      out.eventStep = 0;
      out.reason = StopReason::Covered;
      return;
    }
  } else if (rule.kind == StopKind::HitSet && target->test(idx)) {
    out.eventStep = 0;
    out.reason = StopReason::Hit;
    return;
  }

  const i32* dz_tab = delta_.data();
  for (i64 step = 1;; ++step) {
    if (horizon >= 0 && step > horizon) {
      out.jumpCount = horizon;
      break;
    }
    if (step > budget)
      fail(Errc::StepBudgetExceeded, "no stop after " + std::to_string(budget) + " jumps");

    const int k = alias_.pick(rng);
    if constexpr (kFast3) {
      const i32* dd = dz_tab + std::size_t(k) * 3;
      x += dd[0];
      if (x >= N) x -= N;
      y += dd[1];
      if (y >= N) y -= N;
      z += dd[2];
      if (z >= N) z -= N;
      idx = (i64(x) * N + y) * N + z;
    } else {
      const i32* dd = dz_tab + std::size_t(k) * d;
      idx = 0;
      for (int i = 0; i < d; ++i) {
        i32 c = pos[std::size_t(i)] + dd[i];
        if (c >= N) c -= N;
        pos[std::size_t(i)] = c;
        idx = idx * N + c;
      }
    }
    if (opts.record_path) out.jumpSeq.push_back(i32(k));

    const bool first = out.trace.visit(idx, step);
    if (opts.watch_site >= 0 && out.watchStep < 0 && idx == opts.watch_site) out.watchStep = step;

    if (rule.kind == StopKind::Coverage) {
      if (first && (!target || target->test(idx)) && --remaining == 0) {
        out.eventStep = step;
        out.jumpCount = step;
        out.reason = StopReason::Covered;
        break;
      }
    } else if (rule.kind == StopKind::HitSet || rule.kind == StopKind::ReturnSet) {
      if (target->test(idx)) {
        out.eventStep = step;
        out.jumpCount = step;
        out.reason = StopReason::Hit;
        break;
      }
    }
  }

  if constexpr (kFast3) {
    out.end[0] = x;
    out.end[1] = y;
    out.end[2] = z;
  } else {
    out.end = pos;
  }

  if (rule.kind == StopKind::FixedTime) {
    out.totalTime = rule.time;
  } else if (opts.attach_time) {
    out.totalTime = rng.gamma(double(out.jumpCount));
  }
}

void TorusWalker::run(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng,
                      WalkResult& out) const {
  if (geom_.d == 3)
    run_impl<true>(start, rule, opts, rng, out);
  else
    run_impl<false>(start, rule, opts, rng, out);
}

void TorusWalker::run_portable(const Pt& start, const StopRule& rule, const WalkOptions& opts,
                               RngStream& rng, WalkResult& out) const {
  run_impl<false>(start, rule, opts, rng, out);
}

WalkResult TorusWalker::hitting_time(const Pt& start, const SiteMask& A, bool return_variant,
                                     const WalkOptions& opts, RngStream& rng) const {
  StopRule rule;
  rule.kind = return_variant ? StopKind::ReturnSet : StopKind::HitSet;
  rule.target = &A;
  WalkOptions o = opts;
  o.attach_time = true;
  return run(start, rule, o, rng);
}

WalkResult TorusWalker::cover_time(const Pt& start, const SiteMask* F, const WalkOptions& opts,
                                   RngStream& rng) const {
  StopRule rule;
  rule.kind = StopKind::Coverage;
  rule.target = F;
  WalkOptions o = opts;
  o.attach_time = true;
  return run(start, rule, o, rng);
}

std::vector<double> attach_clock(const std::vector<i64>& steps, RngStream& rng) {
  std::vector<double> times(steps.size(), 0.0);
  i64 prev_step = 0;
  double prev_time = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < prev_step) fail(Errc::ConfigInvalid, "attach_clock needs nondecreasing jump indices");
    prev_time += rng.gamma(double(steps[i] - prev_step));
    prev_step = steps[i];
    times[i] = prev_time;
  }
  return times;
}

void ZdWindow::build(int dim, const std::vector<Pt>& sites) {
  d = dim;
  if (sites.empty()) fail(Errc::ConfigInvalid, "empty window");
  Pt hi = sites[0];
  lo = sites[0];
  for (const Pt& p : sites)
    for (int i = 0; i < d; ++i) {
      lo[std::size_t(i)] = std::min(lo[std::size_t(i)], p[std::size_t(i)]);
      hi[std::size_t(i)] = std::max(hi[std::size_t(i)], p[std::size_t(i)]);
    }
  side = 0;
  for (int i = 0; i < d; ++i) side = std::max(side, hi[std::size_t(i)] - lo[std::size_t(i)] + 1);
  i64 cells = 1;
  for (int i = 0; i < d; ++i) cells *= side;
  if (cells > (i64(1) << 28)) fail(Errc::CapExceeded, "window bounding cube too large");
  cell.assign(std::size_t(cells), -1);
  size = i64(sites.size());
  for (std::size_t s = 0; s < sites.size(); ++s) {
    i64 idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * side + (sites[s][std::size_t(i)] - lo[std::size_t(i)]);
    if (cell[std::size_t(idx)] != -1) fail(Errc::ConfigInvalid, "duplicate window site");
    cell[std::size_t(idx)] = i32(s);
  }
}

ZdWalker::ZdWalker(const MovingMode& mode) : mode_(mode), alias_(mode.jump_prob) {
  njumps_ = int(mode.jumps.size());
  delta_.assign(std::size_t(njumps_) * mode.d, 0);
  for (int k = 0; k < njumps_; ++k)
    for (int i = 0; i < mode.d; ++i) delta_[std::size_t(k) * mode.d + i] = mode.jumps[std::size_t(k)][std::size_t(i)];
}

ZdWalkResult ZdWalker::run_escape(Pt pos, const Pt& center, i32 R, const ZdWindow* window, bool stop_on_hit,
                                  i64 budget, RngStream& rng, std::vector<u32>* visit_epoch, u32 epoch) const {
  const int d = mode_.d;
  ZdWalkResult out;
  if (budget <= 0) budget = i64(4) * R * R * 100 + 1000000;

  auto outside = [&](const Pt& p) {
    for (int i = 0; i < d; ++i)
      if (std::abs(p[std::size_t(i)] - center[std::size_t(i)]) >= R) return true;
    return false;
  };

  auto touch = [&](const Pt& p, bool& stop) {
    stop = false;
    if (!window) return;
    const i32 w = window->lookup(p);
    if (w < 0) return;
    if (visit_epoch && (*visit_epoch)[std::size_t(w)] != epoch) (*visit_epoch)[std::size_t(w)] = epoch;
    if (stop_on_hit) {
      out.firstHitWindowSite = w;
      stop = true;
    }
  };

  bool stop = false;
  touch(pos, stop);
  if (stop) {
    out.end = pos;
    out.reason = ZdStopReason::HitWindow;
    return out;
  }
  if (outside(pos)) {
    out.end = pos;
    out.reason = ZdStopReason::Exited;
    return out;
  }

  if (d == 3) {
    i32 x = pos[0], y = pos[1], z = pos[2];
    const i32 cx = center[0], cy = center[1], cz = center[2];
    for (i64 step = 1; step <= budget; ++step) {
      const int k = alias_.pick(rng);
      const i32* dd = delta_.data() + std::size_t(k) * 3;
      x += dd[0];
      y += dd[1];
      z += dd[2];
      out.steps = step;
      if (std::abs(x - cx) >= R || std::abs(y - cy) >= R || std::abs(z - cz) >= R) {
        out.end = make_pt({x, y, z});
        out.reason = ZdStopReason::Exited;
        return out;
      }
      if (window) {
        Pt p = make_pt({x, y, z});
        touch(p, stop);
        if (stop) {
          out.end = p;
          out.reason = ZdStopReason::HitWindow;
          return out;
        }
      }
    }
    pos = make_pt({x, y, z});
  } else {
    for (i64 step = 1; step <= budget; ++step) {
      const int k = alias_.pick(rng);
      const i32* dd = delta_.data() + std::size_t(k) * d;
      for (int i = 0; i < d; ++i) pos[std::size_t(i)] += dd[i];
      out.steps = step;
      if (outside(pos)) {
        out.end = pos;
        out.reason = ZdStopReason::Exited;
        return out;
      }
      touch(pos, stop);
      if (stop) {
        out.end = pos;
        out.reason = ZdStopReason::HitWindow;
        return out;
      }
    }
  }
  // ran out of jumps; callers with open horizons treat this as an error,
  // fixed-horizon callers read it as "no hit in time"
  out.end = pos;
  out.reason = ZdStopReason::BudgetExhausted;
  return out;
}

}  // namespace covertime
