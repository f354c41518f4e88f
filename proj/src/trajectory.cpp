#include "carpetal/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "carpetal/errors.hpp"
#include "carpetal/field_assembly.hpp"
#include "carpetal/parallel.hpp"

namespace carpetal {

std::string_view to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::completed:
      return "completed";
    case TrajectoryStatus::exited_domain:
      return "exited_domain";
    case TrajectoryStatus::node_stalled:
      return "node_stalled";
  }
  return "unknown";
}

double guiding_velocity(const ParticleSpec& particle, const GratingSpec& grating, double x,
                        double t, double v_max) {
  const auto st = assemble_at(particle, grating, x, t);
  if (!(st.density > 0.0)) return 0.0;
  return std::clamp(st.current / st.density, -v_max, v_max);
}

Trajectory integrate(const ParticleSpec& particle, const GratingSpec& grating, double start_x,
                     const TimeSpan& span, const IntegrationSettings& settings) {
  validate(particle);
  validate(grating);
  if (!(span.delta_t > 0.0)) throw PreconditionError("trajectory span needs delta_t > 0");
  if (settings.substeps < 1) throw PreconditionError("trajectory substeps must be >= 1");
  if (!(start_x >= settings.x_min && start_x <= settings.x_max))
    throw PreconditionError("trajectory start outside the integration domain");

  const double v_max = settings.v_max_factor * particle.forward_speed();
  const double h = span.delta_t / static_cast<double>(settings.substeps);
  auto f = [&](double x, double t) { return guiding_velocity(particle, grating, x, t, v_max); };

  Trajectory traj;
  traj.start_x = start_x;
  traj.positions.reserve(span.steps + 1);
  traj.positions.push_back(start_x);

  double x = start_x;
  int below_floor = 0;
  for (std::size_t k = 0; k < span.steps; ++k) {
    const double t0 = static_cast<double>(k) * span.delta_t;
    const double floor = settings.node_fraction * density_scale(particle, grating, t0);
    if (assemble_at(particle, grating, x, t0).density < floor) {
      if (++below_floor > 1) {
        traj.status = TrajectoryStatus::node_stalled;
        return traj;
      }
    } else {
      below_floor = 0;
    }
    for (std::size_t sub = 0; sub < settings.substeps; ++sub) {
      const double t = t0 + static_cast<double>(sub) * h;
      const double k1 = f(x, t);
      const double k2 = f(x + 0.5 * h * k1, t + 0.5 * h);
      const double k3 = f(x + 0.5 * h * k2, t + 0.5 * h);
      const double k4 = f(x + h * k3, t + h);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!std::isfinite(x) || x < settings.x_min || x > settings.x_max) {
      traj.status = TrajectoryStatus::exited_domain;
      return traj;
    }
    traj.positions.push_back(x);
  }
  traj.status = TrajectoryStatus::completed;
  return traj;
}

long first_ordering_violation(const TrajectoryBundle& bundle) {
  const auto& trajs = bundle.trajectories;
  for (std::size_t k = 0; k <= bundle.span.steps; ++k) {
    bool have_prev = false;
    double prev = 0.0;
    for (const auto& tr : trajs) {
      if (tr.positions.size() <= k) continue;
      const double x = tr.positions[k];
      if (have_prev && !(x > prev)) return static_cast<long>(k);
      prev = x;
      have_prev = true;
    }
  }
  return -1;
}

TrajectoryBundle integrate_bundle(const ParticleSpec& particle, const GratingSpec& grating,
                                  const std::vector<double>& starts, const TimeSpan& span,
                                  const IntegrationSettings& settings, unsigned workers) {
  for (std::size_t i = 1; i < starts.size(); ++i)
    if (!(starts[i] > starts[i - 1]))
      throw PreconditionError("trajectory starts must be strictly increasing (index " +
                              std::to_string(i) + ")");

  TrajectoryBundle bundle;
  bundle.span = span;
  bundle.settings = settings;
  bundle.trajectories.resize(starts.size());
  parallel_blocks(starts.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      bundle.trajectories[i] = integrate(particle, grating, starts[i], span, settings);
  });

  if (const long step = first_ordering_violation(bundle); step >= 0)
    throw OrderingViolation(static_cast<std::size_t>(step),
                            "trajectory ordering violated at output step " +
                                std::to_string(step));
  return bundle;
}

std::vector<double> sample_initial_density(const ParticleSpec& particle,
                                           const GratingSpec& grating, std::size_t count,
                                           std::uint64_t seed, double x_lo, double x_hi,
                                           std::size_t resolution) {
  if (!(x_hi > x_lo)) throw PreconditionError("sampling window needs x_hi > x_lo");
  if (resolution < 2) throw PreconditionError("sampling resolution must be >= 2");

  const double h = (x_hi - x_lo) / static_cast<double>(resolution);
  std::vector<double> cdf(resolution + 1, 0.0);
  double prev = assemble_at(particle, grating, x_lo, 0.0).density;
  for (std::size_t j = 1; j <= resolution; ++j) {
    const double p = assemble_at(particle, grating, x_lo + static_cast<double>(j) * h, 0.0).density;
    cdf[j] = cdf[j - 1] + 0.5 * h * (prev + p);
    prev = p;
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw PreconditionError("initial density vanishes on sampling window");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double target = uniform(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const std::size_t j = std::clamp<std::size_t>(
        static_cast<std::size_t>(it - cdf.begin()), 1, resolution);
    const double span = cdf[j] - cdf[j - 1];
    const double frac = span > 0.0 ? (target - cdf[j - 1]) / span : 0.5;
    out.push_back(x_lo + (static_cast<double>(j - 1) + frac) * h);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> uniform_starts(std::size_t count, double x_lo, double x_hi) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (x_lo + x_hi)};
  if (!(x_hi > x_lo)) throw PreconditionError("uniform starts need x_hi > x_lo");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

}  // namespace carpetal
