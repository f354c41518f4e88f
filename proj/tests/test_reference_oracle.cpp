#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "carpetal/reference_oracle.hpp"
#include "support.hpp"

using namespace carpetal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("one slit gives the Gaussian density", "[oracle]") {
  ParticleSpec p;
  auto g = GratingSpec::uniform(1, 1e-9, 0.12e-9);
  for (double t : {0.0, 5e-13, 3e-12}) {
    const double sig = width_at(p, g.sigma0, t);
    const double x = 0.4e-9;
    const double expect = std::exp(-x * x / (2 * sig * sig)) / std::sqrt(2 * std::numbers::pi * sig * sig);
    CHECK_THAT(oracle::density(p, g, x, t), WithinRel(expect, 1e-13));
  }
}

TEST_CASE("on-axis velocities vanish", "[oracle]") {
  ParticleSpec p;
  auto one = GratingSpec::uniform(1, 1e-9, 0.12e-9);
  auto two = GratingSpec::uniform(2, 1e-9, 0.12e-9);
  for (double t : {0.0, 5e-13, 3e-12}) {
    CHECK_THAT(oracle::velocity(p, one, 0.0, t), WithinAbs(0.0, 1e-12));
    CHECK_THAT(oracle::velocity(p, two, 0.0, t), WithinAbs(0.0, 1e-12 * p.forward_speed()));
  }
}

TEST_CASE("equal and opposite packets produce a node", "[oracle]") {
  ParticleSpec p;
  const double d = 1e-9, mid = 0.4e-9;
  GratingSpec g;
  g.period = d;
  g.sigma0 = 0.3e-9;
  g.centers = {mid - d / 2, mid + d / 2};
  // phase difference m (v1 - v2) mid / hbar = pi at t = 0
  const double w = std::numbers::pi * p.hbar / (2.0 * p.mass * mid);
  g.velocities = {w, -w};
  const double single = std::exp(-0.25 * d * d / (2 * g.sigma0 * g.sigma0)) /
                        std::sqrt(2 * std::numbers::pi * g.sigma0 * g.sigma0);
  const auto st = oracle::evaluate(p, g, mid, 0.0);
  CHECK(st.density <= 1e-20 * single);
  CHECK_THROWS_AS(oracle::velocity(p, g, mid, 0.0, 1e-12 * single), NodeSingularity);
}

TEST_CASE("analytic derivative matches finite differences", "[oracle][property]") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = test::random_config(rng, 6);
    const double t = pick(rng) * 3e-12;
    const double reach = 2.0 * width_at(cfg.particle, cfg.grating.sigma0, t);
    const double x = cfg.grating.centers.front() - reach +
                     pick(rng) * (cfg.grating.centers.back() - cfg.grating.centers.front() + 2 * reach);
    const double h = 1e-4 * cfg.grating.sigma0;
    const auto c = oracle::evaluate(cfg.particle, cfg.grating, x, t);
    const auto lo = oracle::evaluate(cfg.particle, cfg.grating, x - h, t);
    const auto hi = oracle::evaluate(cfg.particle, cfg.grating, x + h, t);
    const auto fd = (hi.psi - lo.psi) / (2.0 * h);
    // scale: |psi| / sigma0 sets the natural derivative magnitude
    const double scale = std::max(std::abs(c.dpsi_dx), std::abs(c.psi) / cfg.grating.sigma0);
    CHECK(std::abs(fd - c.dpsi_dx) <= 1e-6 * scale);
  }
}

TEST_CASE("oracle rejects invalid inputs", "[oracle]") {
  ParticleSpec p;
  GratingSpec empty;
  CHECK_THROWS_AS(oracle::evaluate(p, empty, 0.0, 0.0), PreconditionError);
  auto g = GratingSpec::uniform(1, 1e-9, 1e-10);
  CHECK_THROWS_AS(oracle::evaluate(p, g, 0.0, -1.0), PreconditionError);
}
