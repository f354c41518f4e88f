#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "carpetal/errors.hpp"
#include "carpetal/units.hpp"

namespace carpetal {

/// Massive particle with a fixed de Broglie wavelength along the forward axis.
struct ParticleSpec {
  double mass = kNeutronMass;  // kg
  double wavelength = 1e-9;    // m
  double hbar = kHbar;         // J s

  double forward_wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }
  double forward_speed() const { return hbar * forward_wavenumber() / mass; }
};

/// Transverse slit layout. Every slit emits an untruncated Gaussian of the
/// same initial width sigma0.
struct GratingSpec {
  double period = 1e-9;             // m
  double sigma0 = 1e-10;            // m, standard deviation of R^2 at t = 0
  std::vector<double> centers;      // m, strictly increasing
  std::vector<double> velocities;   // m/s, transverse initial velocity per slit

  std::size_t slit_count() const { return centers.size(); }

  /// N slits on a symmetric grid x_i = (i - (N+1)/2) d, all at rest.
  static GratingSpec uniform(std::size_t slits, double period, double sigma0) {
    GratingSpec g;
    g.period = period;
    g.sigma0 = sigma0;
    g.centers.resize(slits);
    g.velocities.assign(slits, 0.0);
    const double mid = 0.5 * (static_cast<double>(slits) + 1.0);
    for (std::size_t i = 0; i < slits; ++i)
      g.centers[i] = (static_cast<double>(i + 1) - mid) * period;
    return g;
  }
};

inline void validate(const ParticleSpec& p) {
  if (!(p.mass > 0.0) || !std::isfinite(p.mass))
    throw PreconditionError("particle.mass must be positive");
  if (!(p.wavelength > 0.0) || !std::isfinite(p.wavelength))
    throw PreconditionError("particle.wavelength must be positive");
  if (!(p.hbar > 0.0)) throw PreconditionError("particle.hbar must be positive");
}

inline void validate(const GratingSpec& g) {
  if (g.centers.empty()) throw PreconditionError("grating.slits must be >= 1");
  if (!(g.period > 0.0) || !std::isfinite(g.period))
    throw PreconditionError("grating.period must be positive");
  if (!(g.sigma0 > 0.0) || !std::isfinite(g.sigma0))
    throw PreconditionError("grating.sigma0 must be positive");
  if (g.velocities.size() != g.centers.size())
    throw PreconditionError("grating.velocities must have one entry per slit");
  for (std::size_t i = 1; i < g.centers.size(); ++i)
    if (!(g.centers[i] > g.centers[i - 1]))
      throw PreconditionError("grating.centers must be strictly increasing");
}

/// Dimensionless spreading parameter s(t) = hbar t / (2 m sigma0^2).
inline double spreading_parameter(const ParticleSpec& p, double sigma0, double t) {
  return p.hbar * t / (2.0 * p.mass * sigma0 * sigma0);
}

/// sigma_t = sigma0 sqrt(1 + s^2).
inline double width_at(const ParticleSpec& p, double sigma0, double t) {
  const double s = spreading_parameter(p, sigma0, t);
  return sigma0 * std::sqrt(1.0 + s * s);
}

/// One channel's fields at a space-time point.
template <typename Scalar>
struct ChannelField {
  Scalar amplitude{};            // R_i, m^-1/2
  Scalar action{};               // S_i, J s
  Scalar convective_velocity{};  // v_i = dS/dx / m
  Scalar osmotic_velocity{};     // u_i = -(hbar/m) dR/dx / R
  Scalar center{};               // x_c(t), carried for symmetry checks
};

using ChannelFieldd = ChannelField<double>;

/// Free-particle spreading Gaussian launched from slit `channel` (0-based).
template <typename Scalar = double>
ChannelField<Scalar> evaluate_channel(const ParticleSpec& particle,
                                      const GratingSpec& grating,
                                      std::size_t channel, Scalar x, Scalar t) {
  if (channel >= grating.slit_count())
    throw PreconditionError("channel index " + std::to_string(channel) +
                            " out of range for " +
                            std::to_string(grating.slit_count()) + " slits");
  if (t < Scalar(0)) throw PreconditionError("evaluate_channel: t must be >= 0");

  using std::atan;
  using std::exp;
  using std::sqrt;
  const Scalar m = particle.mass;
  const Scalar hbar = particle.hbar;
  const Scalar s0 = grating.sigma0;
  const Scalar v0 = grating.velocities[channel];

  const Scalar s = hbar * t / (Scalar(2) * m * s0 * s0);
  const Scalar var_t = s0 * s0 * (Scalar(1) + s * s);
  // sigma_dot / sigma
  const Scalar rate = s * hbar / (Scalar(2) * m * s0 * s0 * (Scalar(1) + s * s));
  const Scalar xc = Scalar(grating.centers[channel]) + v0 * t;
  const Scalar dx = x - xc;

  ChannelField<Scalar> f;
  f.center = xc;
  f.amplitude = exp(-dx * dx / (Scalar(4) * var_t)) /
                sqrt(sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * var_t));
  f.action = m * v0 * (x - v0 * t / Scalar(2)) + Scalar(0.5) * m * dx * dx * rate -
             Scalar(0.5) * hbar * atan(s);
  f.convective_velocity = v0 + dx * rate;
  f.osmotic_velocity = hbar / m * dx / (Scalar(2) * var_t);
  return f;
}

/// Fields of the listed channels (all channels when `channels` is empty).
template <typename Scalar = double>
std::vector<ChannelField<Scalar>> evaluate_channels(
    const ParticleSpec& particle, const GratingSpec& grating, Scalar x, Scalar t,
    std::span<const std::size_t> channels = {}) {
  std::vector<ChannelField<Scalar>> out;
  if (channels.empty()) {
    out.reserve(grating.slit_count());
    for (std::size_t i = 0; i < grating.slit_count(); ++i)
      out.push_back(evaluate_channel<Scalar>(particle, grating, i, x, t));
  } else {
    out.reserve(channels.size());
    for (std::size_t i : channels)
      out.push_back(evaluate_channel<Scalar>(particle, grating, i, x, t));
  }
  return out;
}

template <typename Scalar>
using PhaseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// phi(i, j) = (S_i - S_j) / hbar. Antisymmetric and additive over triples.
template <typename Scalar>
PhaseMatrix<Scalar> phase_matrix(std::span<const ChannelField<Scalar>> fields,
                                 Scalar hbar = Scalar(kHbar)) {
  const auto n = static_cast<Eigen::Index>(fields.size());
  PhaseMatrix<Scalar> phi = PhaseMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      phi(i, j) = (fields[i].action - fields[j].action) / hbar;
      phi(j, i) = -phi(i, j);
    }
  return phi;
}

template <typename Scalar>
PhaseMatrix<Scalar> phase_matrix(const std::vector<ChannelField<Scalar>>& fields,
                                 Scalar hbar = Scalar(kHbar)) {
  return phase_matrix(std::span<const ChannelField<Scalar>>(fields), hbar);
}

}  // namespace carpetal
