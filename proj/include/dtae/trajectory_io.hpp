#pragma once

// Line-oriented trajectory dump shared by rollout and the estimator oracles.
//
//   # dtae-trajectory v1
//   dims <state_dim> <action_dim>
//   episode <k> <terminated|time_limit|batch_cut>
//   <t>,<s_t...>,<a_t...>,<r_{t+1}>,<done>     one line per transition
//   final,<s_T...>
//
// Numbers use 17 significant digits so a dump reloads bit-exactly. Only
// states, actions, raw rewards and episode ends are stored.

#include <iosfwd>

#include "dtae/rollout.hpp"

namespace dtae {

void write_trajectories(std::ostream& out, const Batch& batch);
Batch read_trajectories(std::istream& in);

}  // namespace dtae
