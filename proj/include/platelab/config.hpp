#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platelab/elasticity.hpp"
#include "platelab/grid.hpp"
#include "platelab/kirchhoff_love.hpp"
#include "platelab/minimize.hpp"

namespace platelab {

/// Settings shared by every experiment. Read from `key = value` lines.
struct ExperimentConfig {
  std::string experiment = "classify";
  int n = 2;
  std::vector<double> omega_lo{0.0};
  std::vector<double> omega_hi{1.0};
  std::vector<int> cells{64};
  int layers = 8;
  std::vector<double> h{0.0625};
  std::vector<double> rho{0.1, 0.01};
  double lambda = 1.0;
  double mu = 1.0;
  std::string crack;
  std::string datum = "zero";
  std::string state = "crack:1:0.5:0.25";
  std::string output = "plate_lab.csv";
  std::uint64_t seed = 1;
  int samples = 20;
  std::vector<double> domain_lo;  // lattice experiments, default (-1, 2)^n
  std::vector<double> domain_hi;
  std::vector<double> region_lo;  // default (0, 1)^n
  std::vector<double> region_hi;
  std::vector<double> offset;     // lattice offset y, default 0
  double delta = 1e-3;
  double jump_position = 0.5;
  int projection_axis = -1;       // default n-1
  std::string smoothing = "sqrt_rho";
  std::string sequence = "recovery";
  SolverConfig solver;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  LameParams lame() const;
  BoxGrid omega() const;
  BoxGrid plate() const;
  Vec3 vec(const std::vector<double>& v, double fill) const;
};

/// Applies one setting; throws std::invalid_argument on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Throws std::runtime_error naming the path when the file cannot be read.
ExperimentConfig load_config(const std::string& path);
/// One line per key with its meaning.
std::string config_help();

/// Seed for one experiment: the global seed plus a fixed per-experiment offset.
std::uint64_t substream_seed(std::uint64_t seed, const std::string& experiment);

/// Reduced state from "file:PATH", "membrane:t", "crack:t:position:jump" or "bend:k".
KLState make_state(const std::string& spec, int n, const BoxGrid& omega);

}  // namespace platelab
