#pragma once

#include "sparse_anova/risk.hpp"
#include "sparse_anova/selector.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparse_anova {

//! Lattice truncation: the design values (344 / 127), none, or a fixed n.
struct WindowSetting {
  enum class Mode { design, none, value };
  Mode mode = Mode::design;
  int value = 0;

  std::optional<int> resolve(int k) const;
  friend bool operator==(const WindowSetting&, const WindowSetting&) = default;
};

//! A product component g_{i1} x ... x g_{ik} on one subset.
struct ComponentEntry {
  std::vector<int> subset;
  std::vector<std::string> factors;
  double alpha = 1.0;

  friend bool operator==(const ComponentEntry&, const ComponentEntry&) = default;
};

//! Everything a CLI command reads. Serialised as JSON (schema_version 1);
//! parse_config(emit_config(c)) == c.
struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  std::string command;
  double sigma = 1.0;
  double eps = 1e-4;
  std::vector<int> d{10};
  std::vector<int> k{2};
  int s = 0;  ///< > 0 simulates the aggregate over orders 1..s
  std::vector<double> alpha{1.0};
  double noise_scale = 1.0;
  WindowSetting window;
  //! Replaces the built-in six-component design when nonempty.
  std::vector<ComponentEntry> components;

  SelectorConfig selector;

  int J = 20;
  std::uint64_t seed = 7;
  Sampler sampler = Sampler::automatic;
  double draw_budget = 1e8;
  int threads = 0;  ///< 0: all hardware threads

  double r = 0.05;               ///< solve-extremal radius
  bool include_support = false;  ///< solve-extremal: list every support frequency
  double beta = 0.5;             ///< dichotomy sparsity
  std::vector<double> margin{0.3, -0.3};
  int actives = 6;  ///< table1 active count
  int beta_steps = 100;
  int gamma_steps = 100;
  double gamma_max = 4.0;

  std::string output_dir;  ///< empty: environment variable, then working directory
  bool include_timing = false;

  //! Throws invalid-argument naming the offending key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const;
};

bool operator==(const SelectorConfig& a, const SelectorConfig& b);

std::string emit_config(const ExperimentConfig& c);
//! Parses and validates; unknown keys and wrong types are invalid-argument.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace sparse_anova
