#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carpetal/commands.hpp"
#include "carpetal/config.hpp"
#include "carpetal/errors.hpp"

using namespace carpetal;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("carpetal_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const auto err = dir / "stderr.txt";
  const std::string cmd = env + " " + CARPETAL_CLI + " " + args + " > " + (dir / "stdout.txt").string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& doc) {
  const auto p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST_CASE("quantities accept unit suffixes", "[config]") {
  CHECK_THAT(parse_quantity(json("1.06 nm"), Dimension::length, "f"), WithinRel(1.06e-9, 1e-15));
  CHECK_THAT(parse_quantity(json("19.2 fs"), Dimension::time, "f"), WithinRel(1.92e-14, 1e-15));
  CHECK_THAT(parse_quantity(json("1.675e-27 kg"), Dimension::mass, "f"), WithinRel(1.675e-27, 1e-15));
  CHECK_THAT(parse_quantity(json("2 nm/ps"), Dimension::velocity, "f"), WithinRel(2000.0, 1e-15));
  CHECK(parse_quantity(json(3.5e-9), Dimension::length, "f") == 3.5e-9);
  CHECK_THROWS_WITH(parse_quantity(json("1 parsec"), Dimension::length, "grid.dx"),
                    ContainsSubstring("grid.dx"));
  CHECK_THROWS_AS(parse_quantity(json("nm"), Dimension::length, "f"), ConfigError);
  CHECK_THROWS_AS(parse_quantity(json("1 nm extra"), Dimension::length, "f"), ConfigError);
  CHECK_THROWS_AS(parse_quantity(json(true), Dimension::length, "f"), ConfigError);
}

TEST_CASE("default configuration is the reference 7-slit setup", "[config]") {
  const auto cfg = default_config();
  CHECK(cfg.grating.slit_count() == 7);
  CHECK_THAT(cfg.grating.period, WithinRel(1.06e-9, 1e-15));
  CHECK_THAT(cfg.grid.delta_x, WithinRel(0.0378e-9, 1e-15));
  CHECK(cfg.grid.delta_t == 1.92e-14);
  CHECK(cfg.grid.steps_t > 300);
}

TEST_CASE("config parsing", "[config]") {
  const json doc = {{"schema_version", 1},
                    {"particle", {{"mass", "1.675e-27 kg"}, {"wavelength", "1 nm"}}},
                    {"grating", {{"slits", 3}, {"period", "0.53 nm"}}},
                    {"grid", {{"dx", "0.0378 nm"}, {"dt", "1.92e-14 s"}, {"steps", 50}}},
                    {"trajectories", {{"starts", {"-0.1 nm", "0.1 nm"}}}},
                    {"outputs", {{"directory", "x"}, {"formats", {"pgm"}}}},
                    {"seed", 42}};
  const auto cfg = parse_config(doc);
  CHECK(cfg.grating.slit_count() == 3);
  CHECK_THAT(cfg.grating.sigma0, WithinRel(0.053e-9, 1e-14));
  CHECK(cfg.grid.steps_t == 50);
  CHECK(cfg.trajectories.start_rule == "explicit");
  CHECK(cfg.trajectories.starts.size() == 2);
  CHECK_FALSE(cfg.outputs.csv);
  CHECK(cfg.outputs.pgm);
  CHECK(cfg.seed == 42);
}

TEST_CASE("config errors name the field", "[config]") {
  CHECK_THROWS_WITH(parse_config(json{{"grating", {{"slits", 0}}}}), ContainsSubstring("grating.slits"));
  CHECK_THROWS_WITH(parse_config(json{{"particle", {{"mass", -1.0}}}}), ContainsSubstring("particle.mass"));
  CHECK_THROWS_WITH(parse_config(json{{"schema_version", 2}}), ContainsSubstring("schema_version"));
  CHECK_THROWS_WITH(parse_config(json{{"grating", {{"slits", 2}, {"centers", {"1 nm", "0 nm"}}}}}),
                    ContainsSubstring("increasing"));
  CHECK_THROWS_WITH(parse_config(json{{"seed", -3}}), ContainsSubstring("seed"));
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/carpetal.json"), ConfigError);
}

TEST_CASE("tolerance scale comes from the environment", "[config]") {
  ::setenv("CARPETAL_TOLERANCE_SCALE", "2.5", 1);
  CHECK(tolerance_scale_from_env() == 2.5);
  ::setenv("CARPETAL_TOLERANCE_SCALE", "abc", 1);
  CHECK_THROWS_AS(tolerance_scale_from_env(), ConfigError);
  ::unsetenv("CARPETAL_TOLERANCE_SCALE");
  CHECK(tolerance_scale_from_env() == 1.0);
}

TEST_CASE("exit-code mapping", "[cli]") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfigError);
  CHECK(exit_code_for(PreconditionError("x")) == kExitConfigError);
  CHECK(exit_code_for(IoError("x")) == kExitIoError);
  CHECK(exit_code_for(OrderingViolation(3, "x")) == kExitPhysicsFailure);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitPhysicsFailure);
}

TEST_CASE("sorkin command", "[cli]") {
  auto cfg = default_config();
  cfg.grating = GratingSpec::uniform(3, 1.06e-9, 0.2e-9);
  cfg.outputs.directory = scratch("sorkin");
  const auto res = cmd_sorkin(cfg, 0, {});
  CHECK(res.exit_code == kExitOk);
  CHECK(res.report["schema_version"] == 1);
  CHECK(res.report["hierarchy"]["orders"][2]["max_relative"].get<double>() <= 1e-12);
  CHECK(fs::exists(cfg.outputs.directory / "sorkin_report.json"));
  CHECK_THROWS_AS(cmd_sorkin(cfg, 4, {}), ConfigError);

  cfg.grating = GratingSpec::uniform(5, 1.06e-9, 0.2e-9);
  cfg.sorkin.samples = 100;
  const auto five = cmd_sorkin(cfg, 5, {});
  CHECK(five.exit_code == kExitOk);
  CHECK(five.report["hierarchy"]["orders"].size() == 5);
}

TEST_CASE("traj command", "[cli]") {
  auto cfg = default_config();
  cfg.grating = GratingSpec::uniform(2, 1e-9, 0.1e-9);
  cfg.grid = GridSpec::covering(cfg.particle, cfg.grating, cfg.grid.delta_x, cfg.grid.delta_t, 100);
  cfg.outputs.directory = scratch("traj");
  cfg.trajectories.start_rule = "explicit";
  cfg.trajectories.starts = {-0.4e-9, -0.1e-9, 0.0, 0.1e-9, 0.4e-9};
  const auto res = cmd_traj(cfg, {});
  CHECK(res.exit_code == kExitOk);
  CHECK(res.report["mirror_check"]["passed"] == true);
  CHECK(res.report["counts"]["completed"] == 5);
  const auto manifest = json::parse(slurp(cfg.outputs.directory / "trajectories_manifest.json"));
  CHECK(manifest["trajectories"].size() == 5);
  const auto csv = slurp(cfg.outputs.directory / "trajectories.csv");
  CHECK(csv.rfind("trajectory,step,t,y,x\n", 0) == 0);

  cfg.trajectories.starts = {0.4e-9, -0.4e-9};
  CHECK_THROWS_AS(cmd_traj(cfg, {}), PreconditionError);
}

TEST_CASE("single-slit center trajectory through the command", "[cli]") {
  auto cfg = default_config();
  cfg.grating = GratingSpec::uniform(1, 1e-9, 0.1e-9);
  cfg.grid = GridSpec::covering(cfg.particle, cfg.grating, cfg.grid.delta_x, cfg.grid.delta_t, 50);
  cfg.outputs.directory = scratch("traj1");
  cfg.trajectories.start_rule = "explicit";
  cfg.trajectories.starts = {0.0};
  const auto res = cmd_traj(cfg, {});
  CHECK(res.exit_code == kExitOk);
  CHECK(res.report["mirror_check"]["max_relative_deviation"] == 0.0);
}

TEST_CASE("validate command reports every family and the tolerance scale", "[cli]") {
  auto cfg = default_config();
  cfg.validate.samples = 2000;
  cfg.outputs.directory = scratch("validate");
  RunOptions opts;
  opts.tolerance_scale = 3.0;
  const auto res = cmd_validate(cfg, opts);
  CHECK(res.exit_code == kExitOk);
  CHECK(res.report["tolerance_scale"] == 3.0);
  std::set<std::string> names;
  for (const auto& f : res.report["families"]) {
    names.insert(f["name"].get<std::string>());
    CHECK(f["passed"] == true);
  }
  CHECK(names.count("oracle_density"));
  CHECK(names.count("gradient_consistency"));
  CHECK(names.count("projection_current_reduction"));
  CHECK(names.count("sorkin_higher_orders"));
  CHECK(res.report["families"][0]["tolerance"].get<double>() == 3e-10);
}

TEST_CASE("CLI exit codes", "[cli]") {
  const auto dir = scratch("exit");
  const auto out = (dir / "out").string();

  SECTION("missing config") {
    const auto r = run_cli("carpet --config " + (dir / "missing.json").string(), dir);
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("missing.json"));
  }
  SECTION("zero slits") {
    const auto cfg = write_config(dir, "zero.json", {{"grating", {{"slits", 0}}}});
    const auto r = run_cli("carpet --config " + cfg.string() + " --out " + out, dir);
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("grating.slits"));
  }
  SECTION("corrupt config") {
    std::ofstream(dir / "bad.json") << "{ not json";
    const auto r = run_cli("validate --config " + (dir / "bad.json").string(), dir);
    CHECK(r.code == 2);
  }
  SECTION("unknown flag") { CHECK(run_cli("carpet --bogus", dir).code == 2); }
  SECTION("max order above slit count") {
    const auto cfg = write_config(dir, "three.json", {{"grating", {{"slits", 3}, {"period", "1.06 nm"}}}});
    CHECK(run_cli("sorkin --max-order 4 --config " + cfg.string() + " --out " + out, dir).code == 2);
    CHECK(run_cli("sorkin --config " + cfg.string() + " --out " + out, dir).code == 0);
  }
  SECTION("reversed starts") {
    const auto cfg = write_config(
        dir, "rev.json",
        {{"grating", {{"slits", 2}, {"period", "1 nm"}}},
         {"grid", {{"steps", 20}}},
         {"trajectories", {{"starts", {"0.3 nm", "-0.3 nm"}}}}});
    CHECK(run_cli("traj --config " + cfg.string() + " --out " + out, dir).code == 2);
  }
  SECTION("unwritable output directory") {
    std::ofstream(dir / "file") << "x";
    const auto cfg = write_config(dir, "small.json",
                                  {{"grating", {{"slits", 2}, {"period", "1 nm"}}},
                                   {"grid", {{"steps", 20}}}});
    const auto r = run_cli("carpet --config " + cfg.string() + " --out " + (dir / "file" / "sub").string(), dir);
    CHECK(r.code == 3);
  }
  SECTION("bad tolerance override") {
    CHECK(run_cli("compare --out " + out, dir, "CARPETAL_TOLERANCE_SCALE=-1").code == 2);
  }
  SECTION("tolerance override is reported") {
    const auto cfg = write_config(dir, "quick.json", {{"validate", {{"samples", 500}}}});
    const auto r = run_cli("validate --config " + cfg.string() + " --out " + out, dir,
                           "CARPETAL_TOLERANCE_SCALE=4");
    CHECK(r.code == 0);
    const auto report = json::parse(slurp(fs::path(out) / "validate_report.json"));
    CHECK(report["tolerance_scale"] == 4.0);
    CHECK(report["passed"] == true);
  }
}

TEST_CASE("identical runs write identical files", "[cli]") {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, "cfg.json",
                                {{"grating", {{"slits", 5}, {"period", "1.06 nm"}}},
                                 {"grid", {{"steps", 80}}},
                                 {"trajectories", {{"count", 40}}},
                                 {"seed", 7}});
  for (const char* run : {"a", "b"}) {
    const auto out = (dir / run).string();
    REQUIRE(run_cli("carpet --config " + cfg.string() + " --out " + out + " --workers 2", dir).code == 0);
    REQUIRE(run_cli("traj --config " + cfg.string() + " --out " + out, dir).code == 0);
  }
  for (const char* name : {"carpet.csv", "carpet.pgm", "trajectories.csv", "trajectories_manifest.json",
                           "carpet_report.json", "traj_report.json"})
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
}
