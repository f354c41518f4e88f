#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carpetal/carpet_renderer.hpp"
#include "carpetal/config.hpp"

using namespace carpetal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("carpetal_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const CarpetGrid& setup_b() {
  static const CarpetGrid grid = [] {
    const auto cfg = default_config();
    return render(cfg.particle, cfg.grating, cfg.grid);
  }();
  return grid;
}

}  // namespace

TEST_CASE("y mapping is linear with the forward speed", "[carpet]") {
  const auto& g = setup_b();
  CHECK(g.y(0) == 0.0);
  CHECK_THAT(g.y(150), WithinRel(150 * 1.92e-14 * g.particle.forward_speed(), 1e-15));
  // h / (lambda m)
  CHECK_THAT(g.y_slope(), WithinRel(kPlanck / (g.particle.wavelength * g.particle.mass), 1e-15));
}

TEST_CASE("Talbot distance", "[carpet]") {
  ParticleSpec p;
  CHECK_THAT(talbot_distance(p, GratingSpec::uniform(7, 2.12e-9, 1e-10)), WithinRel(4.4944e-9, 1e-14));
}

TEST_CASE("empty grid specs are rejected", "[carpet]") {
  ParticleSpec p;
  auto g = GratingSpec::uniform(1, 1e-9, 1e-10);
  CHECK_THROWS_AS(render(p, g, GridSpec{}), PreconditionError);
  CHECK_THROWS_AS(render(p, g, GridSpec{-1e-9, 1e-9, 1e-11, 1e-14, 0}), PreconditionError);
}

TEST_CASE("setup (b) shows the shifted image and the full revival", "[carpet]") {
  const auto& grid = setup_b();
  const auto shifted = detect_talbot(grid, grid.grating);
  CHECK(shifted.step >= 148);
  CHECK(shifted.step <= 152);
  CHECK(shifted.correlation_peak >= 0.9);
  CHECK_THAT(shifted.y_T / shifted.z_T, WithinAbs(1.0, 0.05));
  CHECK(shifted.shift_applied == 0.5 * grid.grating.period);
  CHECK_THAT(shifted.y_quantization, WithinRel(grid.y(1), 1e-15));

  const auto full = detect_recurrence(grid, grid.grating);
  CHECK(full.shift_applied == 0.0);
  CHECK(full.y_T >= 2.24e-9);
  CHECK(full.y_T <= 2.29e-9);
}

TEST_CASE("a single slit has no recurrence", "[carpet]") {
  auto cfg = default_config();
  cfg.grating = GratingSpec::uniform(1, 1.06e-9, 0.106e-9);
  const auto spec = GridSpec::covering(cfg.particle, cfg.grating, cfg.grid.delta_x,
                                       cfg.grid.delta_t, cfg.grid.steps_t);
  const auto grid = render(cfg.particle, cfg.grating, spec);
  CHECK_THROWS_AS(detect_recurrence(grid, cfg.grating), WeakRecurrence);
}

TEST_CASE("short carpets cannot be searched", "[carpet]") {
  auto cfg = default_config();
  const auto spec = GridSpec::covering(cfg.particle, cfg.grating, cfg.grid.delta_x,
                                       cfg.grid.delta_t, 120);
  const auto grid = render(cfg.particle, cfg.grating, spec);
  CHECK_THROWS_AS(detect_talbot(grid, cfg.grating), InsufficientSpan);
}

TEST_CASE("PGM export has the grid dimensions", "[carpet]") {
  const auto& grid = setup_b();
  const auto bytes = pgm_bytes(grid);
  const std::string header =
      "P5\n" + std::to_string(grid.steps_x()) + " " + std::to_string(grid.steps_t()) + "\n255\n";
  REQUIRE(bytes.substr(0, header.size()) == header);
  CHECK(bytes.size() == header.size() + grid.steps_x() * grid.steps_t());
  unsigned char peak = 0;
  for (std::size_t i = header.size(); i < bytes.size(); ++i)
    peak = std::max(peak, static_cast<unsigned char>(bytes[i]));
  CHECK(peak == 255);
}

TEST_CASE("CSV rows carry full precision", "[carpet]") {
  ParticleSpec p;
  auto g = GratingSpec::uniform(2, 1e-9, 1e-10);
  const auto grid = render(p, g, GridSpec{-1e-9, 1e-9, 0.5e-9, 1e-14, 2});
  std::ostringstream out;
  write_carpet_csv(out, grid);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_index,x_index,t,y,x,P_tot");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (rows == 1) CHECK(line.rfind("0,0,0.0000000000000000e+00,0.0000000000000000e+00,-1.0000000000000001e-09,", 0) == 0);
  }
  CHECK(rows == 2 * 5);
}

TEST_CASE("re-export is byte-identical", "[carpet]") {
  const auto& grid = setup_b();
  const auto a = scratch("export_a"), b = scratch("export_b");
  TrajectoryBundle bundle;
  bundle.span = {grid.spec.delta_t, 2};
  bundle.trajectories.push_back({0.0, {0.0, 1e-12, 2e-12}, TrajectoryStatus::completed});
  const auto fa = export_carpet(grid, &bundle, a);
  const auto fb = export_carpet(grid, &bundle, b);
  REQUIRE(fa.paths.size() == 3);
  for (std::size_t i = 0; i < fa.paths.size(); ++i)
    CHECK(slurp(fa.paths[i]) == slurp(fb.paths[i]));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("export reports the failing path", "[carpet]") {
  const auto dir = scratch("blocked");
  std::filesystem::create_directories(dir);
  const auto file = dir / "not_a_dir";
  std::ofstream(file) << "x";
  ParticleSpec p;
  auto g = GratingSpec::uniform(1, 1e-9, 1e-10);
  const auto grid = render(p, g, GridSpec{-1e-9, 1e-9, 0.5e-9, 1e-14, 2});
  CHECK_THROWS_WITH(export_carpet(grid, nullptr, file / "out"),
                    Catch::Matchers::ContainsSubstring("not_a_dir"));
  std::filesystem::remove_all(dir);
}
