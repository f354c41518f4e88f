#include "carpetal/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "carpetal/carpet_renderer.hpp"
#include "carpetal/errors.hpp"
#include "carpetal/units.hpp"

namespace carpetal {

namespace {

using nlohmann::json;

const std::map<std::string, double>& unit_table(Dimension dim) {
  static const std::map<std::string, double> length{
      {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}, {"pm", 1e-12}};
  static const std::map<std::string, double> time{
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
  static const std::map<std::string, double> mass{
      {"kg", 1.0}, {"g", 1e-3}, {"u", 1.66053906660e-27}};
  static const std::map<std::string, double> velocity{
      {"m/s", 1.0}, {"nm/ps", 1e3}, {"km/s", 1e3}};
  switch (dim) {
    case Dimension::length:
      return length;
    case Dimension::time:
      return time;
    case Dimension::mass:
      return mass;
    case Dimension::velocity:
      return velocity;
  }
  return length;
}

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  const json* s = find(doc, key);
  if (s == nullptr) return empty;
  if (!s->is_object()) throw ConfigError(std::string(key) + " must be an object");
  return *s;
}

std::size_t parse_count(const json& v, const std::string& field, std::size_t min_value) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError(field + " must be an integer");
  const auto n = v.get<long long>();
  if (n < static_cast<long long>(min_value))
    throw ConfigError(field + " must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(n);
}

double positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field + " must be positive");
  return v;
}

}  // namespace

double parse_quantity(const json& value, Dimension dim, const std::string& field) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string())
    throw ConfigError(field + " must be a number or a \"<value> <unit>\" string");
  const auto text = value.get<std::string>();
  std::istringstream in(text);
  double number = 0.0;
  std::string unit;
  if (!(in >> number)) throw ConfigError(field + ": cannot parse number in \"" + text + "\"");
  in >> unit;
  std::string trailing;
  if (in >> trailing) throw ConfigError(field + ": unexpected text after unit in \"" + text + "\"");
  if (unit.empty()) return number;
  const auto& table = unit_table(dim);
  auto it = table.find(unit);
  if (it == table.end()) throw ConfigError(field + ": unknown unit \"" + unit + "\"");
  return number * it->second;
}

std::size_t steps_to_reach(const ParticleSpec& particle, const GratingSpec& grating,
                           double delta_t, double factor) {
  const double y = factor * talbot_distance(particle, grating);
  return static_cast<std::size_t>(std::ceil(y / (particle.forward_speed() * delta_t))) + 1;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.particle.mass = kNeutronMass;
  cfg.particle.wavelength = 1.0 * kNanometre;
  cfg.grating = GratingSpec::uniform(7, 1.06 * kNanometre, 0.106 * kNanometre);
  const double dx = 0.0378 * kNanometre;
  const double dt = 1.92e-14;
  cfg.grid = GridSpec::covering(cfg.particle, cfg.grating, dx, dt,
                                steps_to_reach(cfg.particle, cfg.grating, dt, 2.6));
  return cfg;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  if (const json* v = find(doc, "schema_version"))
    if (!v->is_number_integer() || v->get<int>() != kReportSchemaVersion)
      throw ConfigError("schema_version must be " + std::to_string(kReportSchemaVersion));

  RunConfig cfg = default_config();

  const json& particle = section(doc, "particle");
  if (const json* v = find(particle, "mass"))
    cfg.particle.mass = positive(parse_quantity(*v, Dimension::mass, "particle.mass"),
                                 "particle.mass");
  if (const json* v = find(particle, "wavelength"))
    cfg.particle.wavelength = positive(
        parse_quantity(*v, Dimension::length, "particle.wavelength"), "particle.wavelength");

  const json& grating = section(doc, "grating");
  if (!grating.empty()) {
    std::size_t slits = cfg.grating.slit_count();
    double period = cfg.grating.period;
    if (const json* v = find(grating, "slits")) slits = parse_count(*v, "grating.slits", 1);
    if (const json* v = find(grating, "period"))
      period = positive(parse_quantity(*v, Dimension::length, "grating.period"), "grating.period");
    double sigma0 = 0.1 * period;
    if (const json* v = find(grating, "sigma0"))
      sigma0 = positive(parse_quantity(*v, Dimension::length, "grating.sigma0"), "grating.sigma0");
    cfg.grating = GratingSpec::uniform(slits, period, sigma0);
    if (const json* v = find(grating, "centers")) {
      if (!v->is_array() || v->size() != slits)
        throw ConfigError("grating.centers must list one position per slit");
      for (std::size_t i = 0; i < slits; ++i)
        cfg.grating.centers[i] = parse_quantity((*v)[i], Dimension::length,
                                                "grating.centers[" + std::to_string(i) + "]");
      for (std::size_t i = 1; i < slits; ++i)
        if (!(cfg.grating.centers[i] > cfg.grating.centers[i - 1]))
          throw ConfigError("grating.centers must be strictly increasing");
    }
    if (const json* v = find(grating, "velocities")) {
      if (!v->is_array() || v->size() != slits)
        throw ConfigError("grating.velocities must list one velocity per slit");
      for (std::size_t i = 0; i < slits; ++i)
        cfg.grating.velocities[i] = parse_quantity(
            (*v)[i], Dimension::velocity, "grating.velocities[" + std::to_string(i) + "]");
    }
  }

  const json& grid = section(doc, "grid");
  double dx = cfg.grid.delta_x;
  double dt = cfg.grid.delta_t;
  if (const json* v = find(grid, "dx"))
    dx = positive(parse_quantity(*v, Dimension::length, "grid.dx"), "grid.dx");
  if (const json* v = find(grid, "dt"))
    dt = positive(parse_quantity(*v, Dimension::time, "grid.dt"), "grid.dt");
  std::size_t steps = steps_to_reach(cfg.particle, cfg.grating, dt, 2.6);
  if (const json* v = find(grid, "steps")) steps = parse_count(*v, "grid.steps", 1);
  cfg.grid = GridSpec::covering(cfg.particle, cfg.grating, dx, dt, steps);
  if (const json* v = find(grid, "x_min"))
    cfg.grid.x_min = parse_quantity(*v, Dimension::length, "grid.x_min");
  if (const json* v = find(grid, "x_max"))
    cfg.grid.x_max = parse_quantity(*v, Dimension::length, "grid.x_max");
  if (!(cfg.grid.x_max > cfg.grid.x_min)) throw ConfigError("grid.x_max must exceed grid.x_min");

  const json& traj = section(doc, "trajectories");
  if (const json* v = find(traj, "count")) cfg.trajectories.count = parse_count(*v, "trajectories.count", 1);
  if (const json* v = find(traj, "substeps"))
    cfg.trajectories.substeps = parse_count(*v, "trajectories.substeps", 1);
  if (const json* v = find(traj, "v_max_factor")) {
    if (!v->is_number()) throw ConfigError("trajectories.v_max_factor must be a number");
    cfg.trajectories.v_max_factor = positive(v->get<double>(), "trajectories.v_max_factor");
  }
  if (const json* v = find(traj, "start_rule")) {
    if (!v->is_string()) throw ConfigError("trajectories.start_rule must be a string");
    cfg.trajectories.start_rule = v->get<std::string>();
    if (cfg.trajectories.start_rule != "density" && cfg.trajectories.start_rule != "uniform" &&
        cfg.trajectories.start_rule != "explicit")
      throw ConfigError("trajectories.start_rule must be density, uniform or explicit");
  }
  if (const json* v = find(traj, "starts")) {
    if (!v->is_array()) throw ConfigError("trajectories.starts must be an array");
    cfg.trajectories.starts.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      cfg.trajectories.starts.push_back(parse_quantity(
          (*v)[i], Dimension::length, "trajectories.starts[" + std::to_string(i) + "]"));
    if (find(traj, "start_rule") == nullptr) cfg.trajectories.start_rule = "explicit";
  }

  const json& sorkin = section(doc, "sorkin");
  if (const json* v = find(sorkin, "samples")) cfg.sorkin.samples = parse_count(*v, "sorkin.samples", 1);
  if (const json* v = find(sorkin, "max_order"))
    cfg.sorkin.max_order = static_cast<int>(parse_count(*v, "sorkin.max_order", 1));

  const json& validate_section = section(doc, "validate");
  if (const json* v = find(validate_section, "samples"))
    cfg.validate.samples = parse_count(*v, "validate.samples", 1);

  const json& outputs = section(doc, "outputs");
  if (const json* v = find(outputs, "directory")) {
    if (!v->is_string()) throw ConfigError("outputs.directory must be a string");
    cfg.outputs.directory = v->get<std::string>();
  }
  if (const json* v = find(outputs, "formats")) {
    if (!v->is_array()) throw ConfigError("outputs.formats must be an array");
    cfg.outputs.csv = cfg.outputs.pgm = false;
    for (const auto& f : *v) {
      const auto name = f.is_string() ? f.get<std::string>() : std::string();
      if (name == "csv")
        cfg.outputs.csv = true;
      else if (name == "pgm")
        cfg.outputs.pgm = true;
      else
        throw ConfigError("outputs.formats entries must be \"csv\" or \"pgm\"");
    }
  }

  if (const json* v = find(doc, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      throw ConfigError("seed must be a non-negative integer");
    cfg.seed = v->get<std::uint64_t>();
  }

  try {
    validate(cfg.particle);
    validate(cfg.grating);
    validate(cfg.grid);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const ParticleSpec& particle) {
  return {{"mass_kg", particle.mass},
          {"wavelength_m", particle.wavelength},
          {"hbar_Js", particle.hbar},
          {"forward_speed_m_per_s", particle.forward_speed()}};
}

nlohmann::json to_json(const GratingSpec& grating) {
  return {{"slits", grating.slit_count()},
          {"period_m", grating.period},
          {"sigma0_m", grating.sigma0},
          {"centers_m", grating.centers},
          {"velocities_m_per_s", grating.velocities}};
}

nlohmann::json to_json(const GridSpec& grid) {
  return {{"x_min_m", grid.x_min},   {"x_max_m", grid.x_max},
          {"dx_m", grid.delta_x},    {"dt_s", grid.delta_t},
          {"steps_t", grid.steps_t}, {"steps_x", grid.steps_x()}};
}

double tolerance_scale_from_env() {
  const char* raw = std::getenv("CARPETAL_TOLERANCE_SCALE");
  if (raw == nullptr || *raw == '\0') return 1.0;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("CARPETAL_TOLERANCE_SCALE must be a positive number, got \"") +
                      raw + "\"");
  return v;
}

}  // namespace carpetal
