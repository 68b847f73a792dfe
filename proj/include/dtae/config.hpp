#pragma once

// Flat key=value configuration: one key per line, '#' starts a comment.

#include <string>
#include <string_view>
#include <vector>

#include "dtae/trainer.hpp"

namespace dtae {

// Every recognised key, in the order to_config_text writes them.
const std::vector<std::string>& config_keys();

// Throws ConfigError naming the key when it is unknown or its value does not parse.
void apply_setting(TrainConfig& cfg, std::string_view key, std::string_view value);
// "key=value"
void apply_override(TrainConfig& cfg, std::string_view assignment);

TrainConfig parse_config_text(std::string_view text, TrainConfig base = {});
TrainConfig load_config_file(const std::string& path);

// Re-parses to an identical config.
std::string to_config_text(const TrainConfig& cfg);
std::string config_value(const TrainConfig& cfg, std::string_view key);

std::string format_double(double v);

}  // namespace dtae
