#pragma once

// Plain-text parameter checkpoints. Values are written as C99 hex floats so a
// save/load round trip is bit-exact.
//
//   mlp <name> <num_layers>
//   layer <rows> <cols>
//   <rows*cols weights, row-major>
//   <rows biases>
//   vector <name> <size>
//   <values>

#include <iosfwd>
#include <string>

#include "dtae/gaussian.hpp"

namespace dtae {

void write_mlp(std::ostream& out, const std::string& name, const MlpParams<double>& params);
MlpParams<double> read_mlp(std::istream& in, const std::string& expected_name);

struct Checkpoint {
  std::string env;
  GaussianPolicy<double> policy;
  ValueNet<double> value;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the raw bytes of every tensor, in visiting order.
template <typename P>
std::uint64_t parameter_checksum(const P& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for_each_tensor(
      [&h](const auto& t) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
        const std::size_t n = static_cast<std::size_t>(t.size()) * sizeof(*t.data());
        for (std::size_t i = 0; i < n; ++i) {
          h ^= bytes[i];
          h *= 1099511628211ULL;
        }
      },
      params);
  return h;
}

}  // namespace dtae
