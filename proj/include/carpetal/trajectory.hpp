#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "carpetal/channel_model.hpp"

namespace carpetal {

enum class TrajectoryStatus { completed, exited_domain, node_stalled };

std::string_view to_string(TrajectoryStatus status);

/// Output times t_k = k * delta_t for k = 0..steps.
struct TimeSpan {
  double delta_t = 0.0;
  std::size_t steps = 0;
};

struct IntegrationSettings {
  std::size_t substeps = 4;     // RK4 steps per output interval
  double v_max_factor = 50.0;   // |v| capped at v_max_factor * forward_speed
  double node_fraction = 1e-12; // node floor relative to the peak-density bound at t
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  double start_x = 0.0;
  std::vector<double> positions;  // x(t_k); shorter than steps + 1 when stopped early
  TrajectoryStatus status = TrajectoryStatus::completed;
};

struct TrajectoryBundle {
  std::vector<Trajectory> trajectories;  // ordered by start_x
  TimeSpan span;
  IntegrationSettings settings;
};

/// x' = v_tot(x, t) with v_tot evaluated from the channel closed forms at every
/// RK4 stage. Velocities are clamped to +-v_max.
double guiding_velocity(const ParticleSpec& particle, const GratingSpec& grating, double x,
                        double t, double v_max);

Trajectory integrate(const ParticleSpec& particle, const GratingSpec& grating, double start_x,
                     const TimeSpan& span, const IntegrationSettings& settings = {});

/// Integrates every start (strictly increasing) and verifies that the spatial
/// order is preserved at each output step; throws OrderingViolation otherwise.
/// Results are identical for any worker count.
TrajectoryBundle integrate_bundle(const ParticleSpec& particle, const GratingSpec& grating,
                                  const std::vector<double>& starts, const TimeSpan& span,
                                  const IntegrationSettings& settings = {},
                                  unsigned workers = 1);

/// Returns the first output step at which bundle order is broken, or -1.
long first_ordering_violation(const TrajectoryBundle& bundle);

/// `count` sorted, distinct starts drawn from the t = 0 density on [x_lo, x_hi]
/// by inverse-CDF sampling with a seeded Mersenne twister.
std::vector<double> sample_initial_density(const ParticleSpec& particle,
                                           const GratingSpec& grating, std::size_t count,
                                           std::uint64_t seed, double x_lo, double x_hi,
                                           std::size_t resolution = 20000);

/// `count` evenly spaced starts on [x_lo, x_hi].
std::vector<double> uniform_starts(std::size_t count, double x_lo, double x_hi);

}  // namespace carpetal
