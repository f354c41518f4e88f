#include "carpetal/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "carpetal/carpet_renderer.hpp"
#include "carpetal/errors.hpp"
#include "carpetal/field_assembly.hpp"
#include "carpetal/projection_algebra.hpp"
#include "carpetal/reference_oracle.hpp"
#include "carpetal/sorkin_hierarchy.hpp"
#include "carpetal/trajectory.hpp"

namespace carpetal {

namespace {

using nlohmann::json;

json header(const char* command, const RunConfig& config) {
  return {{"schema_version", kReportSchemaVersion},
          {"command", command},
          {"seed", config.seed},
          {"particle", to_json(config.particle)},
          {"grating", to_json(config.grating)}};
}

void write_report(const RunConfig& config, const std::string& name, const json& report) {
  std::error_code ec;
  std::filesystem::create_directories(config.outputs.directory, ec);
  if (ec) throw IoError("cannot create " + config.outputs.directory.string() + ": " + ec.message());
  const auto path = config.outputs.directory / name;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << report.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json to_json(const TalbotResult& r) {
  return {{"step", r.step},
          {"t_T_s", r.t_T},
          {"y_T_m", r.y_T},
          {"z_T_m", r.z_T},
          {"y_T_over_z_T", r.y_T / r.z_T},
          {"correlation_peak", r.correlation_peak},
          {"shift_applied_m", r.shift_applied},
          {"y_quantization_m", r.y_quantization}};
}

/// Seeded (x, t) samples over the slit span widened by three sigma_t, t in [0, t_end].
std::vector<SamplePoint> random_samples(const RunConfig& config, std::size_t count,
                                        std::uint64_t stream) {
  std::mt19937_64 rng(config.seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double t_end =
      static_cast<double>(config.grid.steps_t > 0 ? config.grid.steps_t - 1 : 0) *
      config.grid.delta_t;
  const double first = config.grating.centers.front();
  const double last = config.grating.centers.back();
  std::vector<SamplePoint> out(count);
  for (auto& s : out) {
    s.t = unit(rng) * t_end;
    const double reach = 3.0 * width_at(config.particle, config.grating.sigma0, s.t);
    s.x = first - reach + unit(rng) * (last - first + 2.0 * reach);
  }
  return out;
}

struct Family {
  std::string name;
  std::size_t samples = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  json detail = json::object();

  bool passed() const { return max_error <= tolerance; }
  json to_json() const {
    json j = {{"name", name},
              {"samples", samples},
              {"max_error", max_error},
              {"tolerance", tolerance},
              {"passed", passed()}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
  }
};

struct OracleComparison {
  Family density{"oracle_density", 0, 0.0, 0.0};
  Family velocity{"oracle_velocity", 0, 0.0, 0.0};
  json points = json::array();
};

OracleComparison compare_with_oracle(const RunConfig& config, std::size_t count,
                                     double scale, std::size_t keep_points) {
  const auto samples = random_samples(config, count, 1);
  std::vector<double> p(count), po(count), v(count), vo(count);
  double p_max = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto st = assemble_at(config.particle, config.grating, samples[i].x, samples[i].t);
    const auto ref = oracle::evaluate(config.particle, config.grating, samples[i].x, samples[i].t);
    p[i] = st.density;
    po[i] = ref.density;
    v[i] = st.density > 0.0 ? st.current / st.density : 0.0;
    vo[i] = ref.bohm_velocity;
    p_max = std::max(p_max, st.density);
  }
  OracleComparison cmp;
  cmp.density.tolerance = 1e-10 * scale;
  cmp.velocity.tolerance = 1e-8 * scale;
  cmp.density.samples = count;
  const double speed = config.particle.forward_speed();
  for (std::size_t i = 0; i < count; ++i) {
    const double dp = std::abs(p[i] - po[i]) / p_max;
    cmp.density.max_error = std::max(cmp.density.max_error, dp);
    const bool off_node = p[i] > 1e-9 * p_max;
    double dv = 0.0;
    if (off_node) {
      dv = std::abs(v[i] - vo[i]) / speed;
      cmp.velocity.max_error = std::max(cmp.velocity.max_error, dv);
      ++cmp.velocity.samples;
    }
    if (i < keep_points)
      cmp.points.push_back({{"x_m", samples[i].x},
                            {"t_s", samples[i].t},
                            {"P_tot", p[i]},
                            {"psi_sq", po[i]},
                            {"v_tot", off_node ? json(v[i]) : json(nullptr)},
                            {"v_bohm", off_node ? json(vo[i]) : json(nullptr)},
                            {"density_error_rel_max", dp},
                            {"velocity_error_rel_speed", off_node ? json(dv) : json(nullptr)}});
  }
  cmp.density.detail = {{"max_density", p_max}};
  cmp.velocity.detail = {{"forward_speed", speed}, {"node_fraction", 1e-9}};
  return cmp;
}

Family gradient_family(const RunConfig& config, std::size_t count, double scale) {
  Family fam{"gradient_consistency", 0, 0.0, 1e-6 * scale};
  const auto samples = random_samples(config, count, 2);
  const auto& particle = config.particle;
  const double h = config.grid.delta_x / 100.0;
  const double speed = particle.forward_speed();
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < config.grating.slit_count(); ++i) {
      const auto c = evaluate_channel<double>(particle, config.grating, i, s.x, s.t);
      const auto lo = evaluate_channel<double>(particle, config.grating, i, s.x - h, s.t);
      const auto hi = evaluate_channel<double>(particle, config.grating, i, s.x + h, s.t);
      if (lo.amplitude < 1e-200 || hi.amplitude < 1e-200) continue;
      const double v_fd = (hi.action - lo.action) / (2.0 * h * particle.mass);
      const double u_fd =
          -particle.hbar / particle.mass * (std::log(hi.amplitude) - std::log(lo.amplitude)) / (2.0 * h);
      fam.max_error = std::max(fam.max_error, std::abs(c.convective_velocity - v_fd) /
                                                  std::max(std::abs(c.convective_velocity), speed));
      fam.max_error = std::max(fam.max_error, std::abs(c.osmotic_velocity - u_fd) /
                                                  std::max(std::abs(c.osmotic_velocity), speed));
      ++fam.samples;
    }
  }
  fam.detail = {{"fd_step_m", h}};
  return fam;
}

struct AlgebraFamilies {
  Family decomposition{"kolmogorov_decomposition", 0, 0.0, 0.0};
  Family density{"projection_density_reduction", 0, 0.0, 0.0};
  Family current{"projection_current_reduction", 0, 0.0, 0.0};
  Family closure{"osmotic_closure", 0, 0.0, 0.0};
};

AlgebraFamilies algebra_families(const RunConfig& config, std::size_t count, double scale) {
  AlgebraFamilies fams;
  fams.decomposition.tolerance = 1e-12 * scale;
  fams.density.tolerance = 1e-12 * scale;
  fams.current.tolerance = 1e-12 * scale;
  fams.closure.tolerance = 0.0;
  const auto samples = random_samples(config, count, 3);
  for (const auto& s : samples) {
    const auto fields = evaluate_channels<double>(config.particle, config.grating, s.x, s.t);
    const auto phases = phase_matrix(fields, config.particle.hbar);
    const auto st = assemble(fields, phases);
    double r_sum = 0.0, w_max = 0.0;
    for (const auto& f : fields) {
      r_sum += f.amplitude;
      w_max = std::max(w_max, std::abs(f.convective_velocity) + std::abs(f.osmotic_velocity));
    }
    const double p_scale = r_sum * r_sum;
    if (!(p_scale > 0.0)) continue;
    double partial_sum = 0.0;
    for (double pv : st.partial_densities) partial_sum += pv;
    fams.decomposition.max_error =
        std::max(fams.decomposition.max_error, std::abs(st.density - partial_sum) / p_scale);

    const auto set = make_component_set<double>(std::span<const ChannelFieldd>(fields), phases);
    const auto td = total_density(set);
    const double conv = convective_resultant_density(set);
    fams.density.max_error = std::max({fams.density.max_error,
                                       std::abs(td.projected - st.density) / p_scale,
                                       std::abs(td.resultant - st.density) / p_scale,
                                       std::abs(conv - st.density) / p_scale});
    const double j_scale = std::max(p_scale * w_max, std::abs(st.current));
    if (j_scale > 0.0)
      fams.current.max_error =
          std::max(fams.current.max_error, std::abs(total_current(set) - st.current) / j_scale);
    for (std::size_t i = 0; i < fields.size(); ++i)
      fams.closure.max_error = std::max(fams.closure.max_error, osmotic_closure(set, i).norm());
    ++fams.decomposition.samples;
    ++fams.density.samples;
    ++fams.current.samples;
    ++fams.closure.samples;
  }
  return fams;
}

json to_json(const HierarchyReport& report) {
  json orders = json::array();
  for (const auto& o : report.orders)
    orders.push_back({{"order", o.order},
                      {"max_abs", o.max_abs},
                      {"max_relative", o.max_relative},
                      {"fraction_nonzero", o.fraction_nonzero},
                      {"passed", o.passed}});
  return {{"slits", report.slits},
          {"samples", report.samples},
          {"tolerance", report.tolerance},
          {"nonzero_threshold", report.nonzero_threshold},
          {"required_nonzero_fraction", report.required_nonzero_fraction},
          {"orders", orders},
          {"passed", report.passed()}};
}

/// Samples near one Talbot distance where every channel overlaps its neighbours.
std::vector<SamplePoint> sorkin_samples(const RunConfig& config, std::size_t count) {
  std::mt19937_64 rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double t_talbot = talbot_distance(config.particle, config.grating) /
                          config.particle.forward_speed();
  const double first = config.grating.centers.front() - config.grating.period;
  const double last = config.grating.centers.back() + config.grating.period;
  std::vector<SamplePoint> out(count);
  for (auto& s : out) {
    s.t = (0.5 + unit(rng)) * t_talbot;
    s.x = first + unit(rng) * (last - first);
  }
  return out;
}

}  // namespace

CommandResult cmd_carpet(const RunConfig& config, const RunOptions& options) {
  CommandResult result;
  result.report = header("carpet", config);
  result.report["grid"] = to_json(config.grid);

  const auto grid = render(config.particle, config.grating, config.grid, options.workers);
  ExportOptions exp;
  exp.csv = config.outputs.csv;
  exp.pgm = config.outputs.pgm;
  const auto files = export_carpet(grid, nullptr, config.outputs.directory, exp);
  json paths = json::array();
  for (const auto& p : files.paths) paths.push_back(p.filename().string());
  result.report["files"] = paths;
  std::size_t nodes = 0;
  for (Eigen::Index k = 0; k < grid.nodes.rows(); ++k)
    for (Eigen::Index j = 0; j < grid.nodes.cols(); ++j) nodes += grid.nodes(k, j);
  result.report["node_cells"] = nodes;
  result.report["max_density"] = grid.intensity.maxCoeff();

  auto detect = [&](const char* key, auto&& fn) {
    try {
      result.report[key] = to_json(fn(grid, config.grating));
    } catch (const InsufficientSpan& e) {
      result.report[key] = {{"status", "skipped"}, {"reason", e.what()}};
    } catch (const WeakRecurrence& e) {
      result.report[key] = {{"status", "weak"}, {"reason", e.what()},
                            {"correlation_peak", e.peak()}};
      result.exit_code = kExitPhysicsFailure;
    }
  };
  detect("talbot", [](const CarpetGrid& g, const GratingSpec& gr) { return detect_talbot(g, gr); });
  detect("recurrence",
         [](const CarpetGrid& g, const GratingSpec& gr) { return detect_recurrence(g, gr); });
  result.report["passed"] = result.exit_code == kExitOk;
  write_report(config, "carpet_report.json", result.report);
  return result;
}

CommandResult cmd_sorkin(const RunConfig& config, int max_order, const RunOptions& options) {
  const int n = static_cast<int>(config.grating.slit_count());
  const int order = max_order > 0 ? max_order : n;
  if (order > n)
    throw ConfigError("max_order " + std::to_string(order) + " exceeds slit count " +
                      std::to_string(n));
  if (n > 20) throw ConfigError("sorkin supports at most 20 slits");
  HierarchySettings settings;
  settings.tolerance *= options.tolerance_scale;

  const auto samples = sorkin_samples(config, config.sorkin.samples);
  const auto report = hierarchy_report(config.particle, config.grating, samples, order, settings);

  CommandResult result;
  result.report = header("sorkin", config);
  result.report["tolerance_scale"] = options.tolerance_scale;
  result.report["hierarchy"] = to_json(report);
  bool higher_ok = true;
  for (const auto& o : report.orders)
    if (o.order >= 3 && !o.passed) higher_ok = false;
  result.exit_code = higher_ok ? kExitOk : kExitPhysicsFailure;
  result.report["passed"] = higher_ok;
  write_report(config, "sorkin_report.json", result.report);
  return result;
}

CommandResult cmd_traj(const RunConfig& config, const RunOptions& options) {
  const auto& tc = config.trajectories;
  const double first = config.grating.centers.front() - 4.0 * config.grating.sigma0;
  const double last = config.grating.centers.back() + 4.0 * config.grating.sigma0;
  std::vector<double> starts;
  if (tc.start_rule == "explicit")
    starts = tc.starts;
  else if (tc.start_rule == "uniform")
    starts = uniform_starts(tc.count, first, last);
  else
    starts = sample_initial_density(config.particle, config.grating, tc.count, config.seed,
                                    first, last);
  if (starts.empty()) throw ConfigError("trajectories: no start positions");

  IntegrationSettings settings;
  settings.substeps = tc.substeps;
  settings.v_max_factor = tc.v_max_factor;
  settings.x_min = config.grid.x_min;
  settings.x_max = config.grid.x_max;
  TimeSpan span{config.grid.delta_t, config.grid.steps_t - 1};

  CommandResult result;
  result.report = header("traj", config);
  result.report["grid"] = to_json(config.grid);
  result.report["start_rule"] = tc.start_rule;
  result.report["substeps"] = tc.substeps;

  TrajectoryBundle bundle;
  try {
    bundle = integrate_bundle(config.particle, config.grating, starts, span, settings,
                              options.workers);
  } catch (const OrderingViolation& e) {
    result.exit_code = kExitPhysicsFailure;
    result.report["ordering_violation_step"] = e.step();
    result.report["passed"] = false;
    write_report(config, "traj_report.json", result.report);
    return result;
  }

  std::error_code ec;
  std::filesystem::create_directories(config.outputs.directory, ec);
  if (ec) throw IoError("cannot create " + config.outputs.directory.string() + ": " + ec.message());
  const auto csv_path = config.outputs.directory / "trajectories.csv";
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + csv_path.string() + " for writing");
    write_trajectory_csv(out, bundle, config.particle.forward_speed());
    if (!out) throw IoError("write failed for " + csv_path.string());
  }

  json manifest = {{"schema_version", kReportSchemaVersion}, {"trajectories", json::array()}};
  json counts = {{"completed", 0}, {"exited_domain", 0}, {"node_stalled", 0}};
  for (std::size_t i = 0; i < bundle.trajectories.size(); ++i) {
    const auto& tr = bundle.trajectories[i];
    const std::string status(to_string(tr.status));
    counts[status] = counts[status].get<int>() + 1;
    manifest["trajectories"].push_back({{"index", i},
                                        {"start_x_m", tr.start_x},
                                        {"status", status},
                                        {"stored_steps", tr.positions.size()}});
  }
  write_report(config, "trajectories_manifest.json", manifest);

  // Mirror check for symmetric gratings with symmetric starts.
  bool symmetric = true;
  const auto& g = config.grating;
  for (std::size_t i = 0; i < g.slit_count() && symmetric; ++i) {
    const std::size_t m = g.slit_count() - 1 - i;
    symmetric = std::abs(g.centers[i] + g.centers[m]) <= 1e-12 * g.period &&
                std::abs(g.velocities[i] + g.velocities[m]) <= 1e-12 * config.particle.forward_speed();
  }
  for (std::size_t i = 0; i < starts.size() && symmetric; ++i)
    symmetric = std::abs(starts[i] + starts[starts.size() - 1 - i]) <= 1e-15 * g.period;
  if (symmetric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < bundle.trajectories.size(); ++i) {
      const auto& a = bundle.trajectories[i].positions;
      const auto& b = bundle.trajectories[bundle.trajectories.size() - 1 - i].positions;
      for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
        worst = std::max(worst, std::abs(a[k] + b[k]) /
                                    std::max({std::abs(a[k]), std::abs(b[k]), g.period}));
    }
    const double tol = 1e-9 * options.tolerance_scale;
    result.report["mirror_check"] = {{"max_relative_deviation", worst},
                                     {"tolerance", tol},
                                     {"passed", worst <= tol}};
    if (worst > tol) result.exit_code = kExitPhysicsFailure;
  }

  result.report["counts"] = counts;
  result.report["files"] = {"trajectories.csv", "trajectories_manifest.json"};
  result.report["passed"] = result.exit_code == kExitOk;
  write_report(config, "traj_report.json", result.report);
  return result;
}

CommandResult cmd_validate(const RunConfig& config, const RunOptions& options) {
  const double scale = options.tolerance_scale;
  const std::size_t n = config.validate.samples;
  std::vector<Family> families;

  auto oracle = compare_with_oracle(config, n, scale, 0);
  families.push_back(oracle.density);
  families.push_back(oracle.velocity);
  families.push_back(gradient_family(config, std::min<std::size_t>(n, 2000), scale));
  auto alg = algebra_families(config, std::min<std::size_t>(n, 2000), scale);
  families.push_back(alg.decomposition);
  families.push_back(alg.density);
  families.push_back(alg.current);
  families.push_back(alg.closure);

  if (config.grating.slit_count() >= 3 && config.grating.slit_count() <= 20) {
    HierarchySettings hs;
    hs.tolerance *= scale;
    const int order = static_cast<int>(std::min<std::size_t>(config.grating.slit_count(), 4));
    const auto samples = sorkin_samples(config, std::min<std::size_t>(n, 200));
    const auto rep = hierarchy_report(config.particle, config.grating, samples, order, hs);
    Family fam{"sorkin_higher_orders", samples.size(), 0.0, hs.tolerance};
    for (const auto& o : rep.orders)
      if (o.order >= 3) fam.max_error = std::max(fam.max_error, o.max_relative);
    families.push_back(fam);
  }

  CommandResult result;
  result.report = header("validate", config);
  result.report["tolerance_scale"] = scale;
  json list = json::array();
  bool all = true;
  for (const auto& f : families) {
    list.push_back(f.to_json());
    all = all && f.passed();
  }
  result.report["families"] = list;
  result.report["passed"] = all;
  result.exit_code = all ? kExitOk : kExitPhysicsFailure;
  write_report(config, "validate_report.json", result.report);
  return result;
}

CommandResult cmd_compare(const RunConfig& config, const RunOptions& options) {
  const std::size_t n = std::min<std::size_t>(config.validate.samples, 1000);
  auto cmp = compare_with_oracle(config, n, options.tolerance_scale, n);
  CommandResult result;
  result.report = header("compare", config);
  result.report["tolerance_scale"] = options.tolerance_scale;
  result.report["summary"] = {cmp.density.to_json(), cmp.velocity.to_json()};
  result.report["points"] = cmp.points;
  const bool ok = cmp.density.passed() && cmp.velocity.passed();
  result.report["passed"] = ok;
  result.exit_code = ok ? kExitOk : kExitPhysicsFailure;
  write_report(config, "compare_report.json", result.report);
  return result;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) != nullptr) return kExitConfigError;
  if (dynamic_cast<const PreconditionError*>(&error) != nullptr) return kExitConfigError;
  if (dynamic_cast<const IoError*>(&error) != nullptr) return kExitIoError;
  if (dynamic_cast<const OrderingViolation*>(&error) != nullptr) return kExitPhysicsFailure;
  if (dynamic_cast<const WeakRecurrence*>(&error) != nullptr) return kExitPhysicsFailure;
  if (dynamic_cast<const InsufficientSpan*>(&error) != nullptr) return kExitConfigError;
  return kExitPhysicsFailure;
}

}  // namespace carpetal
