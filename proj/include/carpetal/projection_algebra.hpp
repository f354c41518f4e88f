#pragma once

// Amplitude-weighted pairwise projection over phase-plane unit vectors.
//
// Every channel i contributes three generalized velocity components
// w_{3i-2} = v_i, w_{3i-1} = u_iR, w_{3i} = u_iL sharing the amplitude R_i.
// The partial density of component k is its amplitude times the projection of
// the amplitude-weighted resultant of all unit vectors onto w_k's direction.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "carpetal/channel_model.hpp"
#include "carpetal/errors.hpp"

namespace carpetal {

enum class ComponentKind { convective, osmotic_right, osmotic_left };

template <typename Scalar>
struct VelocityComponent {
  using Vector = Eigen::Matrix<Scalar, 2, 1>;

  Vector unit;          // orientation in the phase plane
  Scalar angle{};       // polar angle of `unit`, rad
  Scalar amplitude{};   // R(w_k)
  Scalar speed{};       // signed x-velocity for convective, non-negative for osmotic
  ComponentKind kind = ComponentKind::convective;
  std::size_t channel = 0;
};

template <typename Scalar>
struct VelocityComponentSet {
  std::vector<VelocityComponent<Scalar>> components;

  std::size_t size() const { return components.size(); }
  std::size_t channel_count() const { return components.size() / 3; }
  const VelocityComponent<Scalar>& operator[](std::size_t k) const {
    return components[k];
  }
};

/// Builds the 3N-component set from per-channel amplitudes, convective angles,
/// convective velocities and signed effective osmotic velocities u_i = u_iR - u_iL.
/// The osmotic unit vectors are exact +-90 degree rotations of the convective one,
/// so R u_iR_hat + R u_iL_hat vanishes without roundoff.
template <typename Scalar>
VelocityComponentSet<Scalar> make_component_set(std::span<const Scalar> amplitudes,
                                                std::span<const Scalar> angles,
                                                std::span<const Scalar> convective,
                                                std::span<const Scalar> osmotic) {
  const std::size_t n = amplitudes.size();
  if (angles.size() != n || convective.size() != n || osmotic.size() != n)
    throw PreconditionError("make_component_set: per-channel inputs differ in length");

  using std::cos;
  using std::sin;
  using Vector = typename VelocityComponent<Scalar>::Vector;
  constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / 2;

  VelocityComponentSet<Scalar> set;
  set.components.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector v_hat(cos(angles[i]), sin(angles[i]));
    const Vector right(-v_hat.y(), v_hat.x());
    const Scalar u = osmotic[i];
    set.components.push_back(
        {v_hat, angles[i], amplitudes[i], convective[i], ComponentKind::convective, i});
    set.components.push_back({right, angles[i] + half_pi, amplitudes[i],
                              u > Scalar(0) ? u : Scalar(0),
                              ComponentKind::osmotic_right, i});
    set.components.push_back({Vector(-right), angles[i] - half_pi, amplitudes[i],
                              u < Scalar(0) ? -u : Scalar(0),
                              ComponentKind::osmotic_left, i});
  }
  return set;
}

/// Component set for physical channel fields. Channel 0 fixes the gauge at
/// angle 0; channel i sits at -phi(0, i).
template <typename Scalar>
VelocityComponentSet<Scalar> make_component_set(
    std::span<const ChannelField<Scalar>> fields, const PhaseMatrix<Scalar>& phases) {
  const std::size_t n = fields.size();
  if (static_cast<std::size_t>(phases.rows()) != n ||
      static_cast<std::size_t>(phases.cols()) != n)
    throw PreconditionError("make_component_set: phase matrix does not match channels");
  std::vector<Scalar> r(n), a(n), v(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = fields[i].amplitude;
    a[i] = -phases(0, static_cast<Eigen::Index>(i));
    v[i] = fields[i].convective_velocity;
    u[i] = fields[i].osmotic_velocity;
  }
  return make_component_set<Scalar>(r, a, v, u);
}

/// P(w_k) = R(w_k) w_k_hat . sum_j w_j_hat R(w_j), summed pairwise.
template <typename Scalar>
Scalar partial_density(const VelocityComponentSet<Scalar>& set, std::size_t k) {
  if (k >= set.size()) throw PreconditionError("partial_density: component index out of range");
  const auto& wk = set[k];
  Scalar acc{};
  for (const auto& wj : set.components) acc += wk.unit.dot(wj.unit) * wj.amplitude;
  return wk.amplitude * acc;
}

/// J(w_k) = w_k P(w_k), the signed x-current carried by component k.
template <typename Scalar>
Scalar partial_current(const VelocityComponentSet<Scalar>& set, std::size_t k) {
  return set[k].speed * partial_density(set, k);
}

/// Both forms of P_tot: the sum of partial densities and the squared resultant.
template <typename Scalar>
struct TotalDensity {
  Scalar projected{};  // sum_k P(w_k)
  Scalar resultant{};  // (sum_k w_k_hat R(w_k))^2
};

template <typename Scalar>
TotalDensity<Scalar> total_density(const VelocityComponentSet<Scalar>& set) {
  TotalDensity<Scalar> out;
  typename VelocityComponent<Scalar>::Vector sum =
      VelocityComponent<Scalar>::Vector::Zero();
  for (std::size_t k = 0; k < set.size(); ++k) {
    out.projected += partial_density(set, k);
    sum += set[k].amplitude * set[k].unit;
  }
  out.resultant = sum.squaredNorm();
  return out;
}

/// (sum_i R_i v_i_hat)^2 over the convective components only.
template <typename Scalar>
Scalar convective_resultant_density(const VelocityComponentSet<Scalar>& set) {
  typename VelocityComponent<Scalar>::Vector sum =
      VelocityComponent<Scalar>::Vector::Zero();
  for (const auto& w : set.components)
    if (w.kind == ComponentKind::convective) sum += w.amplitude * w.unit;
  return sum.squaredNorm();
}

/// Amplitude-weighted sum of one channel's two osmotic unit vectors.
template <typename Scalar>
typename VelocityComponent<Scalar>::Vector osmotic_closure(
    const VelocityComponentSet<Scalar>& set, std::size_t channel) {
  typename VelocityComponent<Scalar>::Vector sum =
      VelocityComponent<Scalar>::Vector::Zero();
  for (const auto& w : set.components)
    if (w.channel == channel && w.kind != ComponentKind::convective)
      sum += w.amplitude * w.unit;
  return sum;
}

template <typename Scalar>
Scalar total_current(const VelocityComponentSet<Scalar>& set) {
  Scalar j{};
  for (std::size_t k = 0; k < set.size(); ++k) j += partial_current(set, k);
  return j;
}

/// |J(w_k + w_l) - J(w_k) - J(w_l)| where the merged component carries the mean
/// of the two partial densities. Vanishes iff P(w_k) = P(w_l) or w_k = w_l.
template <typename Scalar>
Scalar superposition_defect(const VelocityComponentSet<Scalar>& set, std::size_t k,
                            std::size_t l) {
  using std::abs;
  const Scalar pk = partial_density(set, k);
  const Scalar pl = partial_density(set, l);
  const Scalar wk = set[k].speed;
  const Scalar wl = set[l].speed;
  // (w_k + w_l)(P_k + P_l)/2 - w_k P_k - w_l P_l, factored
  return abs((wk - wl) * (pk - pl)) / Scalar(2);
}

}  // namespace carpetal
