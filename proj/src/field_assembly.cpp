#include "carpetal/field_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carpetal/parallel.hpp"

namespace carpetal {

GridSpec GridSpec::covering(const ParticleSpec& particle, const GratingSpec& grating,
                            double delta_x, double delta_t, std::size_t steps_t,
                            double margin) {
  validate(particle);
  validate(grating);
  const double t_end = steps_t > 0 ? static_cast<double>(steps_t - 1) * delta_t : 0.0;
  double reach = 0.0;
  for (std::size_t i = 0; i < grating.slit_count(); ++i) {
    const double start = std::abs(grating.centers[i]);
    const double drift = std::abs(grating.centers[i] + grating.velocities[i] * t_end);
    reach = std::max({reach, start, drift});
  }
  const double half = reach + margin * width_at(particle, grating.sigma0, t_end);
  GridSpec spec;
  spec.delta_x = delta_x;
  spec.delta_t = delta_t;
  spec.steps_t = steps_t;
  // Align to the x grid so that x = 0 is a sample.
  const double cells = std::ceil(half / delta_x);
  spec.x_min = -cells * delta_x;
  spec.x_max = cells * delta_x;
  return spec;
}

void validate(const GridSpec& spec) {
  if (!(spec.delta_x > 0.0)) throw PreconditionError("grid.dx must be positive");
  if (!(spec.delta_t > 0.0)) throw PreconditionError("grid.dt must be positive");
  if (spec.steps_t < 1) throw PreconditionError("grid.steps must be >= 1");
  if (!(spec.x_max > spec.x_min)) throw PreconditionError("grid.x_max must exceed grid.x_min");
}

CarpetGrid assemble_grid(const ParticleSpec& particle, const GratingSpec& grating,
                         const GridSpec& spec, unsigned workers) {
  validate(particle);
  validate(grating);
  validate(spec);

  CarpetGrid grid;
  grid.spec = spec;
  grid.particle = particle;
  grid.grating = grating;
  const auto rows = static_cast<Eigen::Index>(spec.steps_t);
  const auto cols = static_cast<Eigen::Index>(spec.steps_x());
  grid.intensity.resize(rows, cols);
  grid.velocity.resize(rows, cols);  // holds J_tot until the node pass
  grid.nodes = NodeMask::Zero(rows, cols);

  parallel_blocks(spec.steps_t, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<ChannelFieldd> fields(grating.slit_count());
    for (std::size_t k = begin; k < end; ++k) {
      const double t = grid.t(k);
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double x = grid.x(static_cast<std::size_t>(j));
        for (std::size_t i = 0; i < fields.size(); ++i)
          fields[i] = evaluate_channel<double>(particle, grating, i, x, t);
        const auto st = assemble(std::span<const ChannelFieldd>(fields),
                                 phase_matrix(std::span<const ChannelFieldd>(fields),
                                              particle.hbar));
        grid.intensity(static_cast<Eigen::Index>(k), j) = st.density;
        grid.velocity(static_cast<Eigen::Index>(k), j) = st.current;
      }
    }
  });

  const double floor = kNodeFraction * grid.intensity.maxCoeff();
  for (Eigen::Index k = 0; k < rows; ++k)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double p = grid.intensity(k, j);
      if (p < floor || !(p > 0.0)) {
        grid.nodes(k, j) = 1;
        grid.velocity(k, j) = std::numeric_limits<double>::quiet_NaN();
      } else {
        grid.velocity(k, j) /= p;
      }
    }
  return grid;
}

}  // namespace carpetal
