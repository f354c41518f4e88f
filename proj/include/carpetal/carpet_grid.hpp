#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "carpetal/channel_model.hpp"

namespace carpetal {

/// Discretization of the (x, t) plane. x_j = x_min + j dx, t_k = k dt.
struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  double delta_x = 0.0;
  double delta_t = 0.0;
  std::size_t steps_t = 0;

  std::size_t steps_x() const {
    if (!(delta_x > 0.0) || !(x_max > x_min)) return 0;
    return static_cast<std::size_t>(std::floor((x_max - x_min) / delta_x + 1e-9)) + 1;
  }

  /// Symmetric span covering every slit plus `margin` widths sigma_t at the last slice.
  static GridSpec covering(const ParticleSpec& particle, const GratingSpec& grating,
                           double delta_x, double delta_t, std::size_t steps_t,
                           double margin = 8.0);
};

void validate(const GridSpec& spec);

using IntensityMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using NodeMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Filled carpet: one row per time slice, one column per x sample.
struct CarpetGrid {
  GridSpec spec;
  ParticleSpec particle;
  GratingSpec grating;
  IntensityMatrix intensity;  // P_tot, 1/m
  IntensityMatrix velocity;   // v_tot, m/s; NaN at nodes
  NodeMask nodes;             // 1 where P_tot < node floor

  std::size_t steps_t() const { return static_cast<std::size_t>(intensity.rows()); }
  std::size_t steps_x() const { return static_cast<std::size_t>(intensity.cols()); }
  double x(std::size_t j) const { return spec.x_min + static_cast<double>(j) * spec.delta_x; }
  double t(std::size_t k) const { return static_cast<double>(k) * spec.delta_t; }

  /// dy/dt = h / (lambda m) = hbar k / m.
  double y_slope() const { return particle.forward_speed(); }
  double y(std::size_t k) const { return y_slope() * t(k); }
};

}  // namespace carpetal
