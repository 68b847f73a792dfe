#include "dtae/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dtae {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("config key '" + std::string(key) + "': bad number '" + s + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("config key '" + std::string(key) + "': bad integer '" + std::string(text) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true or false, got '" + std::string(text) + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"env",
                                             "algorithm",
                                             "gamma",
                                             "lambda",
                                             "alpha",
                                             "eta_0",
                                             "clip_eps_0",
                                             "lr_0",
                                             "entropy_loss_coef",
                                             "value_loss_coef",
                                             "minibatch_size",
                                             "epochs_per_batch",
                                             "steps_per_batch",
                                             "total_steps",
                                             "estimator",
                                             "combine",
                                             "beta",
                                             "clip",
                                             "normalize_advantages",
                                             "entropy_state",
                                             "value_target",
                                             "max_grad_norm",
                                             "hidden_units",
                                             "initial_log_std",
                                             "seed"};
  return keys;
}

void apply_setting(TrainConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "env") {
    cfg.env = std::string(value);
  } else if (key == "algorithm") {
    if (value == "spod")
      cfg.algorithm = Algorithm::kSpod;
    else if (value == "ppo")
      cfg.algorithm = Algorithm::kPpo;
    else
      throw ConfigError("config key 'algorithm': expected spod or ppo");
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "lambda") {
    cfg.lambda = parse_double(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "eta_0") {
    cfg.eta_0 = parse_double(key, value);
  } else if (key == "clip_eps_0") {
    cfg.clip_eps_0 = parse_double(key, value);
  } else if (key == "lr_0") {
    cfg.lr_0 = parse_double(key, value);
  } else if (key == "entropy_loss_coef") {
    cfg.entropy_loss_coef = parse_double(key, value);
  } else if (key == "value_loss_coef") {
    cfg.value_loss_coef = parse_double(key, value);
  } else if (key == "minibatch_size") {
    cfg.minibatch_size = parse_int<int>(key, value);
  } else if (key == "epochs_per_batch") {
    cfg.epochs_per_batch = parse_int<int>(key, value);
  } else if (key == "steps_per_batch") {
    cfg.steps_per_batch = parse_int<int>(key, value);
  } else if (key == "total_steps") {
    cfg.total_steps = parse_int<std::int64_t>(key, value);
  } else if (key == "estimator") {
    if (value == "dtae")
      cfg.estimator = Estimator::kDtae;
    else if (value == "gae")
      cfg.estimator = Estimator::kGae;
    else
      throw ConfigError("config key 'estimator': expected dtae or gae");
  } else if (key == "combine") {
    cfg.combine = parse_combine_mode(value);
  } else if (key == "beta") {
    cfg.beta = parse_double(key, value);
  } else if (key == "clip") {
    cfg.clip = parse_bool(key, value);
  } else if (key == "normalize_advantages") {
    cfg.normalize_advantages = parse_bool(key, value);
  } else if (key == "entropy_state") {
    if (value == "next")
      cfg.entropy_state = EntropyState::kNext;
    else if (value == "current")
      cfg.entropy_state = EntropyState::kCurrent;
    else
      throw ConfigError("config key 'entropy_state': expected next or current");
  } else if (key == "value_target") {
    if (value == "rewards_to_go")
      cfg.value_target = ValueTarget::kRewardsToGo;
    else if (value == "lambda_return")
      cfg.value_target = ValueTarget::kLambdaReturn;
    else
      throw ConfigError("config key 'value_target': expected rewards_to_go or lambda_return");
  } else if (key == "max_grad_norm") {
    cfg.max_grad_norm = parse_double(key, value);
  } else if (key == "hidden_units") {
    cfg.hidden_units = parse_int<int>(key, value);
  } else if (key == "initial_log_std") {
    cfg.initial_log_std = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void apply_override(TrainConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

TrainConfig parse_config_text(std::string_view text, TrainConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.find('=') == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_override(base, t);
  }
  return base;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_value(const TrainConfig& cfg, std::string_view key) {
  if (key == "env") return cfg.env;
  if (key == "algorithm") return cfg.algorithm == Algorithm::kPpo ? "ppo" : "spod";
  if (key == "gamma") return format_double(cfg.gamma);
  if (key == "lambda") return format_double(cfg.lambda);
  if (key == "alpha") return format_double(cfg.alpha);
  if (key == "eta_0") return format_double(cfg.eta_0);
  if (key == "clip_eps_0") return format_double(cfg.clip_eps_0);
  if (key == "lr_0") return format_double(cfg.lr_0);
  if (key == "entropy_loss_coef") return format_double(cfg.entropy_loss_coef);
  if (key == "value_loss_coef") return format_double(cfg.value_loss_coef);
  if (key == "minibatch_size") return std::to_string(cfg.minibatch_size);
  if (key == "epochs_per_batch") return std::to_string(cfg.epochs_per_batch);
  if (key == "steps_per_batch") return std::to_string(cfg.steps_per_batch);
  if (key == "total_steps") return std::to_string(cfg.total_steps);
  if (key == "estimator") return cfg.estimator == Estimator::kGae ? "gae" : "dtae";
  if (key == "combine") return std::string(to_string(cfg.combine));
  if (key == "beta") return format_double(cfg.beta);
  if (key == "clip") return cfg.clip ? "true" : "false";
  if (key == "normalize_advantages") return cfg.normalize_advantages ? "true" : "false";
  if (key == "entropy_state") return cfg.entropy_state == EntropyState::kCurrent ? "current" : "next";
  if (key == "value_target") return cfg.value_target == ValueTarget::kLambdaReturn ? "lambda_return" : "rewards_to_go";
  if (key == "max_grad_norm") return format_double(cfg.max_grad_norm);
  if (key == "hidden_units") return std::to_string(cfg.hidden_units);
  if (key == "initial_log_std") return format_double(cfg.initial_log_std);
  if (key == "seed") return std::to_string(cfg.seed);
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string to_config_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& key : config_keys()) out += key + "=" + config_value(cfg, key) + "\n";
  return out;
}

}  // namespace dtae
