#include "dtae/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dtae {

namespace {

void write_values(std::ostream& out, const double* data, Index n) {
  char buf[64];
  for (Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%a", data[i]);
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

void read_values(std::istream& in, double* data, Index n) {
  std::string token;
  for (Index i = 0; i < n; ++i) {
    if (!(in >> token)) throw ConfigError("checkpoint: unexpected end of data");
    char* end = nullptr;
    data[i] = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw ConfigError("checkpoint: bad number '" + token + "'");
  }
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw ConfigError("checkpoint: expected '" + word + "', got '" + got + "'");
}

}  // namespace

void write_mlp(std::ostream& out, const std::string& name, const MlpParams<double>& params) {
  out << "mlp " << name << ' ' << params.num_layers() << '\n';
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto& w = params.weights[l];
    out << "layer " << w.rows() << ' ' << w.cols() << '\n';
    write_values(out, w.data(), w.size());
    write_values(out, params.biases[l].data(), params.biases[l].size());
  }
}

MlpParams<double> read_mlp(std::istream& in, const std::string& expected_name) {
  expect(in, "mlp");
  std::string name;
  std::size_t layers = 0;
  if (!(in >> name >> layers)) throw ConfigError("checkpoint: bad mlp header");
  if (name != expected_name) throw ConfigError("checkpoint: expected mlp '" + expected_name + "', got '" + name + "'");
  MlpParams<double> p;
  for (std::size_t l = 0; l < layers; ++l) {
    expect(in, "layer");
    Index rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 1 || cols < 1) throw ConfigError("checkpoint: bad layer shape");
    MatrixXr w(rows, cols);
    VectorXr b(rows);
    read_values(in, w.data(), w.size());
    read_values(in, b.data(), b.size());
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  validate(p);
  return p;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "# dtae-rl checkpoint v1\n";
  out << "env " << ckpt.env << '\n';
  write_mlp(out, "policy_mean", ckpt.policy.mean_net);
  out << "vector log_std " << ckpt.policy.log_std.size() << '\n';
  write_values(out, ckpt.policy.log_std.data(), ckpt.policy.log_std.size());
  write_mlp(out, "value", ckpt.value.net);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "# dtae-rl checkpoint v1") throw ConfigError("checkpoint: missing header");
  Checkpoint ckpt;
  expect(in, "env");
  in >> ckpt.env;
  ckpt.policy.mean_net = read_mlp(in, "policy_mean");
  expect(in, "vector");
  expect(in, "log_std");
  Index n = 0;
  if (!(in >> n) || n != ckpt.policy.mean_net.output_dim()) throw ConfigError("checkpoint: bad log_std size");
  ckpt.policy.log_std.resize(n);
  read_values(in, ckpt.policy.log_std.data(), n);
  ckpt.value.net = read_mlp(in, "value");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path);
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace dtae
