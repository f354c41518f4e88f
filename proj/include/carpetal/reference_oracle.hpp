#pragma once

#include <complex>

#include "carpetal/channel_model.hpp"

namespace carpetal::oracle {

// Standard wave-mechanics reference. Each slit contributes the textbook free
// Gaussian packet
//
//   psi_i = (2 pi sigma0^2)^(-1/4) (1 + i s)^(-1/2)
//           exp(-(x - x_c)^2 / (4 sigma0^2 (1 + i s)) + i m v0 (x - v0 t / 2) / hbar)
//
// evaluated in complex arithmetic. Nothing here touches the channel closed
// forms or the current assembly.

struct OracleState {
  std::complex<double> psi;
  std::complex<double> dpsi_dx;
  double density = 0.0;        // |psi|^2
  double bohm_velocity = 0.0;  // (hbar/m) Im(psi* dpsi/dx) / |psi|^2, NaN at exact nodes
};

OracleState evaluate(const ParticleSpec& particle, const GratingSpec& grating, double x,
                     double t);

/// |psi(x, t)|^2.
double density(const ParticleSpec& particle, const GratingSpec& grating, double x, double t);

/// Bohmian guiding velocity. Throws NodeSingularity when |psi|^2 <= node_floor.
double velocity(const ParticleSpec& particle, const GratingSpec& grating, double x, double t,
                double node_floor = 0.0);

}  // namespace carpetal::oracle
