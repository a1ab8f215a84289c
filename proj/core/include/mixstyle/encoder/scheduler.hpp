#pragma once

#include <array>

#include "mixstyle/fx/fx_params.hpp"

namespace mixstyle::enc {

// Per-FX application probabilities kept in [0.1, 1.0], driven by per-FX
// single-effect validation losses.
struct SchedulerState {
  std::array<double, fx::kNumFx> probabilities = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<double, fx::kNumFx> last_losses = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  void validate() const;
};

// Min-max affine map of losses onto [0.1, 1.0]: lowest loss (easiest FX)
// -> 0.1, highest -> 1.0. All-equal losses map to 1.0 everywhere.
SchedulerState reschedule_probabilities(const std::array<double, fx::kNumFx>& losses);

// Same map restricted to the active FX set; inactive effects keep
// probability 0 so a reduced chain stays reduced. last_losses for inactive
// entries are carried through as given.
SchedulerState reschedule_probabilities(const std::array<double, fx::kNumFx>& losses,
                                        const std::array<bool, fx::kNumFx>& active);

}  // namespace mixstyle::enc
