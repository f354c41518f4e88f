#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carpetal/carpet_grid.hpp"
#include "carpetal/channel_model.hpp"

namespace carpetal {

enum class Dimension { length, time, mass, velocity };

/// Parses a number (taken as SI) or a string "<value> <unit>", e.g. "1.06 nm",
/// "1.92e-14 s", "1.675e-27 kg". Throws ConfigError naming `field`.
double parse_quantity(const nlohmann::json& value, Dimension dim, const std::string& field);

struct TrajectoryConfig {
  std::size_t count = 200;
  std::string start_rule = "density";  // density | uniform | explicit
  std::vector<double> starts;          // used when start_rule == explicit
  std::size_t substeps = 4;
  double v_max_factor = 50.0;
};

struct SorkinConfig {
  std::size_t samples = 1000;
  int max_order = 0;  // 0 selects the slit count
};

struct ValidateConfig {
  std::size_t samples = 10000;
};

struct OutputConfig {
  std::filesystem::path directory = "carpetal_out";
  bool csv = true;
  bool pgm = true;
};

struct RunConfig {
  ParticleSpec particle;
  GratingSpec grating;
  GridSpec grid;
  TrajectoryConfig trajectories;
  SorkinConfig sorkin;
  ValidateConfig validate;
  OutputConfig outputs;
  std::uint64_t seed = 1;
};

/// Seven neutron slits, d = 1.06 nm, lambda = 1 nm on the reference
/// discretization dx = 0.0378 nm, dt = 1.92e-14 s.
RunConfig default_config();

/// Number of time slices that reach `factor` Talbot distances.
std::size_t steps_to_reach(const ParticleSpec& particle, const GratingSpec& grating,
                           double delta_t, double factor);

RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a JSON config file. A missing or unreadable file is a ConfigError.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ParticleSpec& particle);
nlohmann::json to_json(const GratingSpec& grating);
nlohmann::json to_json(const GridSpec& grid);

/// Multiplier applied to validation tolerances, from CARPETAL_TOLERANCE_SCALE
/// (default 1). Throws ConfigError for a non-positive or unparsable value.
double tolerance_scale_from_env();

inline constexpr int kReportSchemaVersion = 1;

}  // namespace carpetal
