#include <atomic>
#include <csignal>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "selforg/error.hpp"
#include "selforg/param_file.hpp"
#include "selforg/run_config.hpp"
#include "selforg/sweep.hpp"
#include "selforg/version.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  using namespace selforg;

  CLI::App app{"Self-organization of a pumped condensate in an optical cavity: phase boundary, "
               "mean-field dynamics and Dicke-model checks"};
  app.set_version_flag("--version", std::string(version()) + " (" + git_hash() + ")");
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> overrides;
  bool quiet = false;

  app.add_option("--config", config_path, "key = value parameter file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default: selforg-<command>)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "base seed for all noise streams");
  app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--override", overrides, "key=value, applied after the config file (repeatable)")
      ->allow_extra_args(false);
  app.add_flag("--quiet", quiet, "no progress output");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ramp", "pump ramp through threshold (gpe or dicke-semiclassical engine)"},
      {"diagram", "detuning x pump power sweep with the analytic boundary overlay"},
      {"ensemble", "seed ensemble of organized ground states; sign statistics"},
      {"boundary", "Thomas-Fermi overlaps and critical pump versus detuning"},
      {"dicke-ed", "exact diagonalization of the Dicke model"},
      {"dicke-ode", "semiclassical Dicke dynamics with cavity decay"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : run::exit_config;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto command = run::parse_command(name);
    KeyValues kv = config_path.empty() ? KeyValues{} : KeyValues::load(config_path);
    for (const auto& o : overrides) kv.set_override(o);
    if (seed_given) kv.set_override("seed=" + std::to_string(seed));
    const auto cfg = run::resolve_config(command, std::move(kv));

    run::RunContext ctx;
    ctx.out = out_dir.empty() ? "selforg-" + name : out_dir;
    ctx.workers = workers;
    ctx.stop = &g_stop;
    ctx.log = quiet ? nullptr : &std::cerr;
    const int code = run::execute(cfg, ctx);
    if (code == run::exit_partial) std::cerr << "selforg: partial completion, see manifest.json\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "selforg: configuration error: " << e.what() << '\n';
    return run::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "selforg: engine failure: " << e.what() << '\n';
    return run::exit_engine;
  }
}
