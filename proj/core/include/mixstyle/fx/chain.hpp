#pragma once

#include <string>

#include "mixstyle/common/rng.hpp"
#include "mixstyle/fx/fx_params.hpp"

namespace mixstyle::fx {

// Draws one chain instance: each FX included independently with its
// configured probability, parameters uniform (frequencies log-uniform)
// within the configured ranges, each of the two order swaps with
// probability 1/2.
FxChainInstance sample_chain(const FxChainConfig& config, Rng& rng);

// Structured text record (effect name -> parameters, order) for experiment
// logging. Round-trips exactly for the double values it carries.
std::string chain_to_json(const FxChainInstance& instance);
FxChainInstance chain_from_json(const std::string& text);

}  // namespace mixstyle::fx
