#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "selforg_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(SELFORG_CLI_PATH) + " --quiet " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(root);
  const auto p = root / name;
  std::ofstream(p) << text;
  return p;
}

const char* const box =
    "gpe.trap = false\ngpe.envelopes = false\ngpe.coupling = 0.0012\n"
    "grid.nx = 32\ngrid.nz = 32\ngrid.wavelengths_x = 4\ngrid.wavelengths_z = 4\n";

}  // namespace

TEST_CASE("successful runs write config.resolved and manifest.json") {
  fs::remove_all(root);
  const auto out = root / "boundary";
  CHECK(run("boundary --out " + out.string() + " --override boundary.delta_c_hz=-23e6,-10e6") == 0);
  CHECK(fs::exists(out / "config.resolved"));
  CHECK(fs::exists(out / "boundary.csv"));
  CHECK(fs::exists(out / "overlaps.csv"));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["command"] == "boundary");

  const auto ed = root / "ed";
  CHECK(run("dicke-ed --out " + ed.string() + " --override dicke.lambda=0,0.5,1") == 0);
  CHECK(fs::exists(ed / "observables.csv"));
  const auto ode = root / "ode";
  CHECK(run("dicke-ode --out " + ode.string() + " --seed 3 --override dicke.t_final=20") == 0);
  CHECK(fs::exists(ode / "trajectory.csv"));
  CHECK(fs::exists(ode / "steady.csv"));
  const auto sc = root / "sc";
  CHECK(run("ramp --out " + sc.string() + " --override engine=dicke-semiclassical --override ramp.duration=1e-3") ==
        0);
  CHECK(fs::exists(sc / "trajectory.csv"));
  CHECK(fs::exists(sc / "threshold.csv"));
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("boundary --out " + (root / "e1").string() + " --override no.such.key=1") == 2);
  CHECK(run("boundary --out " + (root / "e2").string() + " --config " + (root / "missing.cfg").string()) == 2);
  CHECK(run("boundary --out " + (root / "e3").string() + " --workers 0") == 2);
  CHECK(run("--no-such-flag boundary") == 2);
  CHECK(run("dicke-ed --out " + (root / "e4").string() + " --override dicke.omega0=-1") == 2);
  const auto bad = write_config("bad.cfg", "atom_number = many\n");
  CHECK(run("boundary --config " + bad.string() + " --out " + (root / "e5").string()) == 2);
}

TEST_CASE("engine failures exit with 3") {
  const auto cfg = write_config("box.cfg", box);
  const auto out = root / "fail";
  CHECK(run("ensemble --config " + cfg.string() + " --out " + out.string() +
            " --override ensemble.count=1 --override gpe.imag.max_steps=5") == 3);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["error"].get<std::string>().find("not converged") != std::string::npos);
}

TEST_CASE("failed sweep points exit with 4 and keep the rest") {
  const auto cfg = write_config("box_sweep.cfg", std::string(box) +
                                                     "sweep.delta_c_hz = -25e6\nsweep.powers = 1e-5, 10\n"
                                                     "ramp.duration = 1e-3\nramp.p_start = 1e-5\n");
  const auto out = root / "partial";
  CHECK(run("diagram --config " + cfg.string() + " --out " + out.string()) == 4);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "partial");
  const auto sweep = slurp(out / "sweep.csv");
  CHECK(sweep.find(",ok\n") != std::string::npos);
  CHECK(sweep.find(",failed\n") != std::string::npos);
  fs::remove_all(root);
}
