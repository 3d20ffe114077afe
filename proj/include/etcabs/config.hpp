#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "etcabs/plant.hpp"
#include "etcabs/quotient.hpp"

namespace etcabs {

/// Invalid configuration; what() starts with the dotted field name.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AbstractionConfig {
  double sigma_bar = 1.0;
  std::size_t l = 100;
  std::size_t n_conv = 5;
  std::size_t m_bar = 10;
  std::size_t nu_grid = 16;
  double nu_safety = 1.5;
  double flowpipe_step = 0.01;
  std::size_t eps_max_doubling_cap = 60;
  std::size_t bisection_iterations = 30;
  std::size_t subgradient_iterations = 500;
  InitialSetSpec initial_regions;
  double xml_scale = 1e4;
};

struct SimulationConfig {
  double horizon = 5.0;
  std::size_t trace_count = 100;
  std::uint64_t seed = 1;
  double scan_dt = 1e-3;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json", "xml"};

  bool wants(const std::string& fmt) const;
};

struct RunConfig {
  Plant plant = default_plant();
  AbstractionConfig abstraction;
  SimulationConfig simulation;
  OutputConfig output;

  /// ẋ = [[0, 1], [-2, 3]] x + [0, 1]ᵀ u, u = [1, -4] x, α = 0.05.
  static Plant default_plant();
};

/// Missing keys keep their defaults; unknown keys and invalid values throw
/// ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
/// Fully populated form; config_from_json(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const RunConfig& c);

void validate_config(const RunConfig& c);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

}  // namespace etcabs
