#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mixstyle/cloner/train_cloner.hpp"
#include "mixstyle/encoder/train_encoder.hpp"

namespace mixstyle::cli {

using nlohmann::json;

// Every key path with its paper-derived default. Unknown keys are rejected.
json default_config();

// Load file (optional), apply --set key.path=value overrides, validate.
json resolve_config(const std::string& config_path, const std::vector<std::string>& overrides);

void reject_unknown_keys(const json& defaults, const json& user, const std::string& path);

fx::FxChainConfig fx_config_from(const json& cfg);
enc::EncoderConfig encoder_arch_from(const json& cfg);
enc::EncoderTrainConfig encoder_train_from(const json& cfg);
cloner::TcnConfig tcn_config_from_cfg(const json& cfg);
cloner::SpectralLossConfig loss_config_from(const json& cfg);
cloner::ClonerTrainConfig cloner_train_from(const json& cfg);

// Config snapshot, seed, input content hashes, wall time.
void write_manifest(const std::string& out_dir, const std::string& subcommand, const json& cfg,
                    const std::vector<std::string>& input_paths, double wall_ms);

}  // namespace mixstyle::cli
