#pragma once

#include <optional>
#include <vector>

#include "covertime/mode.hpp"
#include "covertime/rng.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// Visited-set trace with covered counter; optionally records the jump index
// of each site's first visit.
struct TraceSet {
  i64 volume = 0;
  i64 coveredCount = 0;
  bool trackFirstHit = false;
  std::vector<u64> bits;
  std::vector<i64> firstHitStep;  // -1 when unvisited; only sized when tracked

  void init(i64 vol, bool track) {
    volume = vol;
    trackFirstHit = track;
    bits.assign(std::size_t((vol + 63) / 64), 0);
    coveredCount = 0;
    if (track)
      firstHitStep.assign(std::size_t(vol), -1);
    else
      firstHitStep.clear();
  }

  void reset() {
    std::fill(bits.begin(), bits.end(), 0);
    coveredCount = 0;
    if (trackFirstHit) std::fill(firstHitStep.begin(), firstHitStep.end(), i64(-1));
  }

  bool visited(i64 idx) const { return (bits[std::size_t(idx >> 6)] >> (idx & 63)) & 1u; }

  // returns true on first visit
  bool visit(i64 idx, i64 step) {
    u64& w = bits[std::size_t(idx >> 6)];
    const u64 m = u64(1) << (idx & 63);
    if (w & m) return false;
    w |= m;
    ++coveredCount;
    if (trackFirstHit) firstHitStep[std::size_t(idx)] = step;
    return true;
  }
};

enum class StopKind { FixedJumps, FixedTime, Coverage, HitSet, ReturnSet };

struct StopRule {
  StopKind kind = StopKind::FixedJumps;
  i64 jumps = 0;                      // FixedJumps
  double time = 0.0;                  // FixedTime (continuous horizon)
  const SiteMask* target = nullptr;   // Coverage subset F (null = full torus) or Hit/Return set A
};

struct WalkOptions {
  i64 step_budget = -1;      // -1: geometry default policy
  bool record_path = false;  // store signed jump indices
  bool track_first_hit = false;
  bool attach_time = false;  // draw totalTime ~ Gamma(jumpCount, 1)
  i64 watch_site = -1;       // record first-visit step of one site without stopping
};

enum class StopReason { Completed, Covered, Hit };

struct WalkResult {
  Pt start{};
  Pt end{};
  i64 jumpCount = 0;     // jumps performed until the stop fired
  i64 eventStep = -1;    // hit/"covered" jump index (0 = at start); -1 for fixed rules
  double totalTime = 0;  // Gamma(jumpCount,1) draw, or the horizon for FixedTime
  i64 watchStep = -1;
  StopReason reason = StopReason::Completed;
  TraceSet trace;
  std::vector<i32> jumpSeq;  // indices into mode.jumps when record_path
};

// Jump-chain simulator on the torus. The continuous-time walk is recovered by
// attaching an independent Gamma(jumpCount, 1) clock (holding times are i.i.d.
// Exp(1) and independent of the chain), and fixed-time horizons draw the jump
// count as Poisson(T) up front. Exceeding the step budget raises
// StepBudgetExceeded.
class TorusWalker {
 public:
  TorusWalker(const MovingMode& mode, const TorusGeometry& geom);

  const TorusGeometry& geometry() const { return geom_; }
  const MovingMode& mode() const { return mode_; }

  void run(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng,
           WalkResult& out) const;

  WalkResult run(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng) const {
    WalkResult r;
    run(start, rule, opts, rng, r);
    return r;
  }

  // dimension-generic reference loop; consumes the same RNG draws as run()
  void run_portable(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng,
                    WalkResult& out) const;

  // continuous-time entrance/return time in jump steps; attaches Gamma time
  WalkResult hitting_time(const Pt& start, const SiteMask& A, bool return_variant, const WalkOptions& opts,
                          RngStream& rng) const;

  // cover time of F (null = full torus)
  WalkResult cover_time(const Pt& start, const SiteMask* F, const WalkOptions& opts, RngStream& rng) const;

 private:
  template <bool kFast3>
  void run_impl(const Pt& start, const StopRule& rule, const WalkOptions& opts, RngStream& rng,
                WalkResult& out) const;

  MovingMode mode_;
  TorusGeometry geom_;
  AliasTable alias_;
  // per-jump nonnegative deltas mod N, laid out [jump][dim]
  std::vector<i32> delta_;
  int njumps_ = 0;
};

// Attach continuous times to an increasing sequence of jump indices by
// drawing successive Gamma increments; exact joint law of the jump-time
// process at those indices, monotone by construction.
std::vector<double> attach_clock(const std::vector<i64>& steps, RngStream& rng);

// Walks on Z^d stopped at escape from an l-infinity ball, with an optional
// small recording window. Used by the interlacement sampler, potential-theory
// Monte Carlo cross-checks, and hit-probability scaling runs.
struct ZdWindow {
  Pt lo{};               // corner of bounding cube
  i32 side = 0;          // cube side
  int d = 0;
  std::vector<i32> cell;  // side^d entries: window site index or -1
  i64 size = 0;

  void build(int d, const std::vector<Pt>& sites);
  i32 lookup(const Pt& p) const {  // -1 when outside
    i64 idx = 0;
    for (int i = 0; i < d; ++i) {
      const i32 c = p[std::size_t(i)] - lo[std::size_t(i)];
      if (c < 0 || c >= side) return -1;
      idx = idx * side + c;
    }
    return cell[std::size_t(idx)];
  }
};

enum class ZdStopReason { Exited, HitWindow, BudgetExhausted };

struct ZdWalkResult {
  Pt end{};
  i64 steps = 0;
  ZdStopReason reason = ZdStopReason::Exited;
  i32 firstHitWindowSite = -1;
};

class ZdWalker {
 public:
  ZdWalker(const MovingMode& mode);

  // Runs from `pos` until |pos - center|_inf >= R. If `window` is given,
  // first visits of window sites invoke `mark` (i32 window-site id); when
  // stop_on_hit, the walk stops at the first window visit instead.
  ZdWalkResult run_escape(Pt pos, const Pt& center, i32 R, const ZdWindow* window, bool stop_on_hit,
                          i64 budget, RngStream& rng, std::vector<u32>* visit_epoch, u32 epoch) const;

  const MovingMode& mode() const { return mode_; }

 private:
  MovingMode mode_;
  AliasTable alias_;
  std::vector<i32> delta_;
  int njumps_ = 0;
};

}  // namespace covertime
