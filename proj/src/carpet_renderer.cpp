#include "carpetal/carpet_renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "carpetal/errors.hpp"
#include "carpetal/field_assembly.hpp"

namespace carpetal {

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

void append_sci(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  line += buf;
}

std::ofstream open_for_write(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

CarpetGrid render(const ParticleSpec& particle, const GratingSpec& grating,
                  const GridSpec& spec, unsigned workers) {
  if (spec.steps_t == 0 || spec.steps_x() == 0)
    throw PreconditionError("render: empty grid specification");
  return assemble_grid(particle, grating, spec, workers);
}

TalbotResult detect_recurrence_with(const CarpetGrid& grid, const GratingSpec& grating,
                                    const RecurrenceSearch& search) {
  if (grid.steps_t() == 0 || grid.steps_x() == 0)
    throw PreconditionError("detect: empty grid");
  const double z_t = talbot_distance(grid.particle, grating);
  const double y_lo = search.lo_factor * z_t;
  const double y_hi = search.hi_factor * z_t;
  const double y_last = grid.y(grid.steps_t() - 1);
  if (y_last < y_hi) {
    std::ostringstream msg;
    msg << "carpet reaches y = " << y_last << " m but the search needs " << y_hi << " m";
    throw InsufficientSpan(msg.str());
  }

  std::vector<std::size_t> columns;
  const std::size_t n = grating.slit_count();
  if (n >= 5) {
    const double lo = grating.centers.front() + 2.0 * grating.period;
    const double hi = grating.centers.back() - 2.0 * grating.period;
    for (std::size_t j = 0; j < grid.steps_x(); ++j)
      if (grid.x(j) > lo && grid.x(j) < hi) columns.push_back(j);
  }
  if (columns.size() < 3) {
    columns.resize(grid.steps_x());
    for (std::size_t j = 0; j < columns.size(); ++j) columns[j] = j;
  }

  std::vector<double> reference(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c)
    reference[c] =
        assemble_at(grid.particle, grating, grid.x(columns[c]) - search.shift, 0.0).density;

  TalbotResult best;
  best.correlation_peak = -2.0;
  std::vector<double> slice(columns.size());
  for (std::size_t k = 0; k < grid.steps_t(); ++k) {
    const double y = grid.y(k);
    if (y < y_lo || y > y_hi) continue;
    for (std::size_t c = 0; c < columns.size(); ++c)
      slice[c] = grid.intensity(static_cast<Eigen::Index>(k),
                                static_cast<Eigen::Index>(columns[c]));
    const double r = pearson(slice, reference);
    if (r > best.correlation_peak) {
      best.correlation_peak = r;
      best.step = k;
    }
  }
  if (best.correlation_peak < -1.5)
    throw InsufficientSpan("no time slice falls inside the recurrence search range");

  best.t_T = grid.t(best.step);
  best.y_T = grid.y(best.step);
  best.z_T = z_t;
  best.shift_applied = search.shift;
  best.y_quantization = grid.y_slope() * grid.spec.delta_t;
  if (best.correlation_peak < search.min_peak) {
    std::ostringstream msg;
    msg << "best correlation " << best.correlation_peak << " at step " << best.step
        << " is below " << search.min_peak;
    throw WeakRecurrence(best.correlation_peak, msg.str());
  }
  return best;
}

TalbotResult detect_talbot(const CarpetGrid& grid, const GratingSpec& grating) {
  RecurrenceSearch search;
  search.shift = 0.5 * grating.period;
  return detect_recurrence_with(grid, grating, search);
}

TalbotResult detect_recurrence(const CarpetGrid& grid, const GratingSpec& grating) {
  RecurrenceSearch search;
  search.shift = 0.0;
  search.lo_factor = 1.5;
  search.hi_factor = 2.5;
  return detect_recurrence_with(grid, grating, search);
}

void write_carpet_csv(std::ostream& out, const CarpetGrid& grid) {
  out << "t_index,x_index,t,y,x,P_tot\n";
  std::string line;
  for (std::size_t k = 0; k < grid.steps_t(); ++k) {
    const double t = grid.t(k);
    const double y = grid.y(k);
    for (std::size_t j = 0; j < grid.steps_x(); ++j) {
      line.clear();
      line += std::to_string(k);
      line += ',';
      line += std::to_string(j);
      line += ',';
      append_sci(line, t);
      line += ',';
      append_sci(line, y);
      line += ',';
      append_sci(line, grid.x(j));
      line += ',';
      append_sci(line, grid.intensity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
      line += '\n';
      out << line;
    }
  }
}

std::string pgm_bytes(const CarpetGrid& grid) {
  if (grid.steps_t() == 0 || grid.steps_x() == 0) throw PreconditionError("pgm: empty grid");
  const double peak = grid.intensity.maxCoeff();
  std::string bytes = "P5\n" + std::to_string(grid.steps_x()) + " " +
                      std::to_string(grid.steps_t()) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + grid.steps_t() * grid.steps_x());
  std::size_t pos = header;
  for (Eigen::Index k = 0; k < grid.intensity.rows(); ++k)
    for (Eigen::Index j = 0; j < grid.intensity.cols(); ++j) {
      const double v = peak > 0.0 ? 255.0 * grid.intensity(k, j) / peak : 0.0;
      bytes[pos++] = static_cast<char>(static_cast<unsigned char>(
          std::clamp(std::lround(v), 0L, 255L)));
    }
  return bytes;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryBundle& bundle, double y_slope) {
  out << "trajectory,step,t,y,x\n";
  std::string line;
  for (std::size_t i = 0; i < bundle.trajectories.size(); ++i) {
    const auto& tr = bundle.trajectories[i];
    for (std::size_t k = 0; k < tr.positions.size(); ++k) {
      const double t = static_cast<double>(k) * bundle.span.delta_t;
      line = std::to_string(i) + ',' + std::to_string(k) + ',';
      append_sci(line, t);
      line += ',';
      append_sci(line, y_slope * t);
      line += ',';
      append_sci(line, tr.positions[k]);
      line += '\n';
      out << line;
    }
  }
}

ExportedFiles export_carpet(const CarpetGrid& grid, const TrajectoryBundle* bundle,
                            const std::filesystem::path& directory,
                            const ExportOptions& options) {
  if (grid.steps_t() == 0 || grid.steps_x() == 0)
    throw PreconditionError("export: empty grid");
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

  ExportedFiles files;
  if (options.csv) {
    const auto path = directory / (options.stem + ".csv");
    auto out = open_for_write(path, false);
    write_carpet_csv(out, grid);
    finish(out, path);
    files.paths.push_back(path);
  }
  if (options.pgm) {
    const auto path = directory / (options.stem + ".pgm");
    auto out = open_for_write(path, true);
    const auto bytes = pgm_bytes(grid);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    finish(out, path);
    files.paths.push_back(path);
  }
  if (bundle != nullptr) {
    const auto path = directory / (options.stem + "_trajectories.csv");
    auto out = open_for_write(path, false);
    write_trajectory_csv(out, *bundle, grid.y_slope());
    finish(out, path);
    files.paths.push_back(path);
  }
  return files;
}

}  // namespace carpetal
