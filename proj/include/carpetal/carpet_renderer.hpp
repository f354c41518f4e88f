#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "carpetal/carpet_grid.hpp"
#include "carpetal/channel_model.hpp"
#include "carpetal/trajectory.hpp"

namespace carpetal {

/// z_T = d^2 / lambda.
inline double talbot_distance(const ParticleSpec& particle, const GratingSpec& grating) {
  return grating.period * grating.period / particle.wavelength;
}

/// Evaluates the carpet over the grid (rows in parallel).
CarpetGrid render(const ParticleSpec& particle, const GratingSpec& grating,
                  const GridSpec& spec, unsigned workers = 1);

struct TalbotResult {
  std::size_t step = 0;         // time-slice index of the correlation peak
  double t_T = 0.0;             // s
  double y_T = 0.0;             // m, h t_T / (lambda m)
  double z_T = 0.0;             // m, d^2 / lambda
  double correlation_peak = 0.0;
  double shift_applied = 0.0;   // m
  double y_quantization = 0.0;  // m, y advance per time slice
};

struct RecurrenceSearch {
  double shift = 0.0;         // reference is P_tot(x - shift, 0)
  double lo_factor = 0.5;     // search y in [lo_factor z_T, hi_factor z_T]
  double hi_factor = 1.5;
  double min_peak = 0.9;
};

/// Argmax over the search range of the Pearson correlation between each time
/// slice and the shifted t = 0 profile, on a central window that leaves out the
/// outer two periods (whole grid for fewer than five slits).
/// Throws InsufficientSpan / WeakRecurrence.
TalbotResult detect_recurrence_with(const CarpetGrid& grid, const GratingSpec& grating,
                                    const RecurrenceSearch& search);

/// First d/2-shifted self-image near z_T.
TalbotResult detect_talbot(const CarpetGrid& grid, const GratingSpec& grating);

/// Unshifted revival near 2 z_T.
TalbotResult detect_recurrence(const CarpetGrid& grid, const GratingSpec& grating);

/// Writes "t_index,x_index,t,y,x,P_tot" rows in 17-significant-digit scientific notation.
void write_carpet_csv(std::ostream& out, const CarpetGrid& grid);

/// Binary P5 image, one row per time slice, linear scaling to the grid maximum.
std::string pgm_bytes(const CarpetGrid& grid);

/// Writes "trajectory,step,t,y,x" rows for every stored position.
void write_trajectory_csv(std::ostream& out, const TrajectoryBundle& bundle, double y_slope);

struct ExportOptions {
  bool csv = true;
  bool pgm = true;
  std::string stem = "carpet";
};

struct ExportedFiles {
  std::vector<std::filesystem::path> paths;
};

/// Writes the selected artifacts under `directory` (created if needed).
/// Throws IoError naming the failing path.
ExportedFiles export_carpet(const CarpetGrid& grid, const TrajectoryBundle* bundle,
                            const std::filesystem::path& directory,
                            const ExportOptions& options = {});

}  // namespace carpetal
