#pragma once

#include <cstddef>
#include <random>

#include "carpetal/channel_model.hpp"

namespace carpetal::test {

struct RandomConfig {
  ParticleSpec particle;
  GratingSpec grating;
};

/// Random mass (0.2 to 5 neutron masses), wavelength, period, width, slit count
/// in [1, max_slits], jittered centers and small transverse velocities.
inline RandomConfig random_config(std::mt19937_64& rng, std::size_t max_slits,
                                  std::size_t min_slits = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomConfig c;
  c.particle.mass = kNeutronMass * std::exp(std::log(0.2) + u(rng) * std::log(25.0));
  c.particle.wavelength = (0.5 + u(rng)) * 1e-9;
  const std::size_t n =
      min_slits + static_cast<std::size_t>(u(rng) * static_cast<double>(max_slits - min_slits + 1));
  const double d = (0.5 + 1.5 * u(rng)) * 1e-9;
  c.grating = GratingSpec::uniform(n, d, (0.05 + 0.25 * u(rng)) * d);
  for (std::size_t i = 0; i < n; ++i) {
    c.grating.centers[i] += (u(rng) - 0.5) * 0.3 * d;
    c.grating.velocities[i] = (u(rng) - 0.5) * 0.1 * c.particle.forward_speed();
  }
  return c;
}

}  // namespace carpetal::test
