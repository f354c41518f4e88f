#include "carpetal/reference_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "carpetal/errors.hpp"

namespace carpetal::oracle {

OracleState evaluate(const ParticleSpec& particle, const GratingSpec& grating, double x,
                     double t) {
  validate(particle);
  validate(grating);
  if (t < 0.0) throw PreconditionError("oracle: t must be >= 0");

  using cplx = std::complex<double>;
  const double m = particle.mass;
  const double hbar = particle.hbar;
  const double s0 = grating.sigma0;
  const cplx one_is(1.0, hbar * t / (2.0 * m * s0 * s0));
  const cplx norm = std::pow(2.0 * std::numbers::pi * s0 * s0, -0.25) / std::sqrt(one_is);

  OracleState st;
  for (std::size_t i = 0; i < grating.slit_count(); ++i) {
    const double v0 = grating.velocities[i];
    const double dx = x - grating.centers[i] - v0 * t;
    const cplx width = 4.0 * s0 * s0 * one_is;
    const cplx exponent = -dx * dx / width + cplx(0.0, m * v0 * (x - 0.5 * v0 * t) / hbar);
    const cplx psi = norm * std::exp(exponent);
    st.psi += psi;
    st.dpsi_dx += psi * (-2.0 * dx / width + cplx(0.0, m * v0 / hbar));
  }
  st.density = std::norm(st.psi);
  st.bohm_velocity = st.density > 0.0
                         ? hbar / m * std::imag(std::conj(st.psi) * st.dpsi_dx) / st.density
                         : std::numeric_limits<double>::quiet_NaN();
  return st;
}

double density(const ParticleSpec& particle, const GratingSpec& grating, double x, double t) {
  return evaluate(particle, grating, x, t).density;
}

double velocity(const ParticleSpec& particle, const GratingSpec& grating, double x, double t,
                double node_floor) {
  const auto st = evaluate(particle, grating, x, t);
  if (!(st.density > node_floor))
    throw NodeSingularity("oracle: |psi|^2 = " + std::to_string(st.density) +
                          " at or below node floor");
  return st.bohm_velocity;
}

}  // namespace carpetal::oracle
