#include "mixstyle/encoder/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace mixstyle::enc {

void SchedulerState::validate() const {
  for (double p : probabilities)
    require((p >= 0.1 && p <= 1.0) || p == 0.0,
            "SchedulerState: probability out of [0.1, 1.0]");
}

SchedulerState reschedule_probabilities(const std::array<double, fx::kNumFx>& losses) {
  std::array<bool, fx::kNumFx> all_active;
  all_active.fill(true);
  return reschedule_probabilities(losses, all_active);
}

SchedulerState reschedule_probabilities(const std::array<double, fx::kNumFx>& losses,
                                        const std::array<bool, fx::kNumFx>& active) {
  double lo = 1e300, hi = -1e300;
  int n_active = 0;
  for (int i = 0; i < fx::kNumFx; ++i) {
    if (!active[static_cast<size_t>(i)]) continue;
    const double l = losses[static_cast<size_t>(i)];
    require(std::isfinite(l), "reschedule_probabilities: non-finite loss");
    lo = std::min(lo, l);
    hi = std::max(hi, l);
    ++n_active;
  }
  require(n_active >= 1, "reschedule_probabilities: no active FX");

  SchedulerState state;
  state.last_losses = losses;
  state.probabilities.fill(0.0);
  for (int i = 0; i < fx::kNumFx; ++i) {
    if (!active[static_cast<size_t>(i)]) continue;
    if (hi - lo <= 0.0) {
      state.probabilities[static_cast<size_t>(i)] = 1.0;
    } else {
      const double p = 0.1 + 0.9 * (losses[static_cast<size_t>(i)] - lo) / (hi - lo);
      // 0.1 + 0.9 rounds one ulp above 1.0
      state.probabilities[static_cast<size_t>(i)] = std::clamp(p, 0.1, 1.0);
    }
  }
  state.validate();
  return state;
}

}  // namespace mixstyle::enc
