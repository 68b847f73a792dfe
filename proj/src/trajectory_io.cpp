#include "dtae/trajectory_io.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dtae {

namespace {

constexpr std::string_view kHeader = "# dtae-trajectory v1";

const char* end_name(EpisodeEnd end) {
  switch (end) {
    case EpisodeEnd::kTerminated:
      return "terminated";
    case EpisodeEnd::kTimeLimit:
      return "time_limit";
    case EpisodeEnd::kBatchCut:
      return "batch_cut";
  }
  return "time_limit";
}

EpisodeEnd parse_end(const std::string& s) {
  if (s == "terminated") return EpisodeEnd::kTerminated;
  if (s == "time_limit") return EpisodeEnd::kTimeLimit;
  if (s == "batch_cut") return EpisodeEnd::kBatchCut;
  throw ConfigError("trajectory file: unknown episode end '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("trajectory file: bad number '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("trajectory file: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_trajectories(std::ostream& out, const Batch& batch) {
  Index sd = 0, ad = 0;
  if (!batch.trajectories.empty()) {
    sd = batch.trajectories.front().states.cols();
    ad = batch.trajectories.front().actions.cols();
  }
  out << kHeader << '\n';
  out << "dims " << sd << ' ' << ad << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < batch.trajectories.size(); ++k) {
    const Trajectory& tr = batch.trajectories[k];
    out << "episode " << k << ' ' << end_name(tr.end) << '\n';
    for (Index t = 0; t < tr.length(); ++t) {
      out << t;
      for (Index i = 0; i < sd; ++i) out << ',' << tr.states(t, i);
      for (Index i = 0; i < ad; ++i) out << ',' << tr.actions(t, i);
      const bool done = tr.terminated() && t + 1 == tr.length();
      out << ',' << tr.raw_rewards[t] << ',' << (done ? 1 : 0) << '\n';
    }
    out << "final";
    for (Index i = 0; i < sd; ++i) out << ',' << tr.states(tr.length(), i);
    out << '\n';
  }
}

Batch read_trajectories(std::istream& in) {
  Batch batch;
  std::string line;
  Index sd = -1, ad = -1;
  std::vector<std::vector<double>> states, actions;
  std::vector<double> rewards;
  EpisodeEnd end = EpisodeEnd::kTimeLimit;
  bool in_episode = false;

  if (!std::getline(in, line) || line != kHeader) throw ConfigError("trajectory file: missing version header");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("dims ", 0) == 0) {
      std::istringstream ss(line.substr(5));
      ss >> sd >> ad;
      if (!ss || sd < 0 || ad < 0) throw ConfigError("trajectory file: bad dims line");
      continue;
    }
    if (sd < 0) throw ConfigError("trajectory file: missing dims line");
    if (line.rfind("episode ", 0) == 0) {
      if (in_episode) throw ConfigError("trajectory file: episode without final state");
      std::istringstream ss(line.substr(8));
      std::size_t k = 0;
      std::string end_text;
      ss >> k >> end_text;
      end = parse_end(end_text);
      states.clear();
      actions.clear();
      rewards.clear();
      in_episode = true;
      continue;
    }
    if (!in_episode) throw ConfigError("trajectory file: transition outside an episode");
    const auto fields = split_csv(line);
    if (fields.front() == "final") {
      if (static_cast<Index>(fields.size()) != 1 + sd) throw ConfigError("trajectory file: bad final line");
      std::vector<double> s;
      for (Index i = 0; i < sd; ++i) s.push_back(parse_double(fields[1 + i]));
      states.push_back(std::move(s));
      Trajectory tr;
      const Index n = static_cast<Index>(rewards.size());
      tr.states.resize(n + 1, sd);
      tr.actions.resize(n, ad);
      for (Index t = 0; t <= n; ++t)
        for (Index i = 0; i < sd; ++i) tr.states(t, i) = states[t][i];
      for (Index t = 0; t < n; ++t)
        for (Index i = 0; i < ad; ++i) tr.actions(t, i) = actions[t][i];
      tr.raw_rewards = Eigen::Map<const VectorXr>(rewards.data(), n);
      tr.soft_rewards = tr.raw_rewards;
      tr.old_log_probs = VectorXr::Zero(n);
      tr.next_state_entropies = VectorXr::Zero(n);
      tr.state_entropies = VectorXr::Zero(n);
      tr.end = end;
      batch.trajectories.push_back(std::move(tr));
      in_episode = false;
      continue;
    }
    if (static_cast<Index>(fields.size()) != 3 + sd + ad) throw ConfigError("trajectory file: bad transition line");
    std::vector<double> s, a;
    for (Index i = 0; i < sd; ++i) s.push_back(parse_double(fields[1 + i]));
    for (Index i = 0; i < ad; ++i) a.push_back(parse_double(fields[1 + sd + i]));
    states.push_back(std::move(s));
    actions.push_back(std::move(a));
    rewards.push_back(parse_double(fields[1 + sd + ad]));
  }
  if (in_episode) throw ConfigError("trajectory file: truncated after last episode header");
  return batch;
}

}  // namespace dtae
