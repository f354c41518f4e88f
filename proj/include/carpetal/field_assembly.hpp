#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carpetal/carpet_grid.hpp"
#include "carpetal/channel_model.hpp"
#include "carpetal/errors.hpp"

namespace carpetal {

/// Total density, current and velocity at one (x, t).
template <typename Scalar>
struct CurrentState {
  Scalar density{};                     // P_tot, 1/m
  Scalar current{};                     // J_tot, 1/s
  std::optional<Scalar> velocity;       // v_tot = J_tot / P_tot, empty at nodes
  std::vector<Scalar> partial_densities;  // P(v_i)

  Scalar velocity_or_throw() const {
    if (!velocity)
      throw NodeSingularity("v_tot undefined: P_tot = " + std::to_string(double(density)) +
                            " is at or below the node floor");
    return *velocity;
  }
};

/// Closed-form N-channel assembly from 2N effective velocities.
///
///   P_tot = sum_i (R_i^2 + sum_{j>i} 2 R_i R_j cos phi_ij)
///   J_tot = sum_i (R_i^2 v_i + sum_{j>i} R_i R_j [(v_i + v_j) cos phi_ij
///                                               + (u_j - u_i) sin phi_ij])
///
/// with phi_ij = (S_i - S_j)/hbar. Summation order is fixed (channels ascending,
/// pairs lexicographic) so results never depend on how callers partition work.
/// v_tot is left empty where P_tot <= node_floor.
template <typename Scalar>
CurrentState<Scalar> assemble(std::span<const ChannelField<Scalar>> fields,
                              const PhaseMatrix<Scalar>& phases,
                              Scalar node_floor = Scalar(0)) {
  using std::cos;
  using std::sin;
  const std::size_t n = fields.size();
  if (n == 0) throw PreconditionError("assemble: no channels");
  if (static_cast<std::size_t>(phases.rows()) != n ||
      static_cast<std::size_t>(phases.cols()) != n)
    throw PreconditionError("assemble: phase matrix does not match channel count");

  CurrentState<Scalar> st;
  st.partial_densities.assign(n, Scalar(0));
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar ri = fields[i].amplitude;
    const Scalar vi = fields[i].convective_velocity;
    const Scalar ui = fields[i].osmotic_velocity;
    Scalar p = ri * ri;
    Scalar j = ri * ri * vi;
    st.partial_densities[i] += ri * ri;
    for (std::size_t k = i + 1; k < n; ++k) {
      const Scalar rk = fields[k].amplitude;
      const Scalar phi = phases(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      const Scalar c = cos(phi);
      const Scalar s = sin(phi);
      const Scalar rr = ri * rk;
      p += Scalar(2) * rr * c;
      j += rr * ((vi + fields[k].convective_velocity) * c +
                 (fields[k].osmotic_velocity - ui) * s);
      st.partial_densities[i] += rr * c;
      st.partial_densities[k] += rr * c;
    }
    st.density += p;
    st.current += j;
  }
  if (st.density > node_floor) st.velocity = st.current / st.density;
  return st;
}

template <typename Scalar>
CurrentState<Scalar> assemble(const std::vector<ChannelField<Scalar>>& fields,
                              const PhaseMatrix<Scalar>& phases,
                              Scalar node_floor = Scalar(0)) {
  return assemble(std::span<const ChannelField<Scalar>>(fields), phases, node_floor);
}

/// Evaluates every channel of the grating at (x, t) and assembles.
inline CurrentState<double> assemble_at(const ParticleSpec& particle,
                                        const GratingSpec& grating, double x, double t,
                                        double node_floor = 0.0) {
  const auto fields = evaluate_channels<double>(particle, grating, x, t);
  return assemble(fields, phase_matrix(fields, particle.hbar), node_floor);
}

/// Upper bound on P_tot at time t: every channel at its peak and in phase.
inline double density_scale(const ParticleSpec& particle, const GratingSpec& grating,
                            double t) {
  const double sigma_t = width_at(particle, grating.sigma0, t);
  const double n = static_cast<double>(grating.slit_count());
  return n * n / (std::sqrt(2.0 * std::numbers::pi) * sigma_t);
}

/// Relative node floor: cells below this fraction of the grid maximum are nodes.
inline constexpr double kNodeFraction = 1e-12;

/// Fills P_tot and v_tot over the grid. Rows (time slices) are split across
/// `workers` threads; every cell is computed independently so the output is
/// identical for any worker count. Cells with P_tot < kNodeFraction * max(P_tot)
/// are flagged as nodes and carry NaN velocity.
CarpetGrid assemble_grid(const ParticleSpec& particle, const GratingSpec& grating,
                         const GridSpec& spec, unsigned workers = 1);

}  // namespace carpetal
