#include "selforg/run_config.hpp"

#include <ostream>
#include <sstream>

#include "selforg/constants.hpp"
#include "selforg/error.hpp"

namespace selforg::run {

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

// Reads keys with defaults and records the value actually used.
class Settings {
 public:
  Settings(KeyValues& kv, std::map<std::string, std::string>& resolved) : kv_(kv), resolved_(resolved) {}

  double real(const std::string& key, double def) {
    const double v = kv_.take_double(key).value_or(def);
    resolved_[key] = format_double(v);
    return v;
  }
  std::optional<double> optional_real(const std::string& key) {
    auto v = kv_.take_double(key);
    if (v) resolved_[key] = format_double(*v);
    return v;
  }
  long long integer(const std::string& key, long long def) {
    const long long v = kv_.take_int(key).value_or(def);
    resolved_[key] = std::to_string(v);
    return v;
  }
  int positive(const std::string& key, long long def) {
    const long long v = integer(key, def);
    if (v < 1 || v > 1'000'000'000) throw ConfigError(key + " must be a positive integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool def) {
    const bool v = kv_.take_bool(key).value_or(def);
    resolved_[key] = v ? "true" : "false";
    return v;
  }
  std::string choice(const std::string& key, const std::string& def, const std::vector<const char*>& allowed) {
    const std::string v = kv_.take(key).value_or(def);
    for (const char* a : allowed) {
      if (v == a) {
        resolved_[key] = v;
        return v;
      }
    }
    std::string msg = key + ": '" + v + "' is not one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg);
  }
  std::vector<double> reals(const std::string& key, const std::vector<double>& def) {
    auto v = kv_.take_doubles(key).value_or(def);
    resolved_[key] = join(v);
    return v;
  }
  // A list given either in rad/s (`key`) or in Hz (`key_hz`); stored in rad/s.
  std::vector<double> angular_list(const std::string& key, const std::vector<double>& def) {
    auto rad = kv_.take_doubles(key);
    auto hz = kv_.take_doubles(key + "_hz");
    if (rad && hz) throw ConfigError(key + " and " + key + "_hz are mutually exclusive");
    std::vector<double> v = def;
    if (rad) v = *rad;
    if (hz) {
      v.clear();
      for (double f : *hz) v.push_back(constants::two_pi * f);
    }
    resolved_[key] = join(v);
    return v;
  }

 private:
  KeyValues& kv_;
  std::map<std::string, std::string>& resolved_;
};

void read_grid(Settings& s, GridSpec& g) {
  g.n_x = s.positive("grid.nx", g.n_x);
  g.n_z = s.positive("grid.nz", g.n_z);
  g.wavelengths_x = s.real("grid.wavelengths_x", g.wavelengths_x);
  g.wavelengths_z = s.real("grid.wavelengths_z", g.wavelengths_z);
  g.make();
}

void read_gpe(Settings& s, GpeSpec& g, const RecoilUnits& u) {
  g.model.trap = s.flag("gpe.trap", true);
  g.model.envelopes = s.flag("gpe.envelopes", true);
  const auto sigma = s.choice("gpe.sigma_y", "oscillator", {"oscillator", "thomas_fermi"});
  g.model.sigma_y = sigma == "oscillator" ? gpe::SigmaY::oscillator : gpe::SigmaY::thomas_fermi;
  g.model.coupling = s.optional_real("gpe.coupling");
  g.dt = s.real("gpe.dt", u.time_si(0.01));
  if (!(g.dt > 0.0)) throw ConfigError("gpe.dt must be > 0");
  g.noise = s.real("gpe.noise", g.noise);
  if (g.noise < 0.0) throw ConfigError("gpe.noise must be >= 0");
  g.relax = s.flag("gpe.relax", g.relax);
  g.record_every = s.positive("gpe.record_every", g.record_every);
  auto& im = g.imaginary;
  im.dtau = u.time(s.real("gpe.imag.dtau", u.time_si(im.dtau)));
  im.max_steps = s.positive("gpe.imag.max_steps", im.max_steps);
  im.energy_tol = s.real("gpe.imag.energy_tol", im.energy_tol);
  im.theta_tol = s.real("gpe.imag.theta_tol", im.theta_tol);
  im.patience = s.positive("gpe.imag.patience", im.patience);
}

void read_ramp(Settings& s, RampSpec& r) {
  r.relative = s.flag("ramp.relative", false);
  r.duration = s.real("ramp.duration", 10e-3);
  r.hold = s.real("ramp.hold", 0.0);
  r.p_start = s.real("ramp.p_start", 0.0);
  r.p_end = s.real("ramp.p_end", r.relative ? 1.6 : 1.3e-3);
  r.cap = s.optional_real("ramp.cap");
  if (!(r.duration > 0.0)) throw ConfigError("ramp.duration must be > 0");
  if (r.hold < 0.0) throw ConfigError("ramp.hold must be >= 0");
  if (r.p_start < 0.0 || r.p_end < 0.0) throw ConfigError("ramp powers must be >= 0");
  if (r.cap && !(*r.cap > 0.0)) throw ConfigError("ramp.cap must be > 0");
}

void read_threshold(Settings& s, ThresholdOptions& t) {
  t.baseline_fraction = s.real("threshold.baseline_fraction", t.baseline_fraction);
  t.factor = s.real("threshold.factor", t.factor);
  t.consecutive_steps = s.positive("threshold.consecutive", t.consecutive_steps);
  t.absolute_floor = s.optional_real("threshold.floor");
  t.pump_scaled = s.flag("threshold.pump_scaled", t.pump_scaled);
  if (!(t.baseline_fraction > 0.0 && t.baseline_fraction <= 1.0)) {
    throw ConfigError("threshold.baseline_fraction must be in (0, 1]");
  }
}

void read_dicke(Settings& s, DickeSpec& d, Command c) {
  d.from_experiment = s.flag("dicke.from_experiment", false);
  d.atom_number = s.positive("dicke.atom_number", d.atom_number);
  if (!d.from_experiment) {
    d.omega = s.real("dicke.omega", d.omega);
    d.omega0 = s.real("dicke.omega0", d.omega0);
    d.kappa = s.real("dicke.kappa", c == Command::dicke_ed ? 0.0 : 1.0);
  }
  d.relative = s.flag("dicke.relative", false);
  d.lambda = s.reals("dicke.lambda", d.relative ? std::vector<double>{2.0} : std::vector<double>{1.0});
  if (d.lambda.empty()) throw ConfigError("dicke.lambda must list at least one value");
  d.dispersive = s.flag("dicke.dispersive", false);
  d.lightshift = s.real("dicke.lightshift", 0.0);
  if (c == Command::dicke_ed) {
    d.cutoff = s.positive("dicke.cutoff", d.cutoff);
    d.tolerance = s.real("dicke.tolerance", d.tolerance);
    d.max_cutoff = s.positive("dicke.max_cutoff", d.max_cutoff);
  } else {
    d.t_final = s.real("dicke.t_final", d.t_final);
    d.dt = s.optional_real("dicke.dt");
    d.noise = s.real("dicke.noise", d.noise);
    d.record_every = s.positive("dicke.record_every", d.record_every);
    if (d.lambda.size() != 1) throw ConfigError("dicke-ode integrates a single dicke.lambda");
  }
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "ramp") return Command::ramp;
  if (name == "diagram") return Command::diagram;
  if (name == "ensemble") return Command::ensemble;
  if (name == "boundary") return Command::boundary;
  if (name == "dicke-ed") return Command::dicke_ed;
  if (name == "dicke-ode") return Command::dicke_ode;
  throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::ramp: return "ramp";
    case Command::diagram: return "diagram";
    case Command::ensemble: return "ensemble";
    case Command::boundary: return "boundary";
    case Command::dicke_ed: return "dicke-ed";
    case Command::dicke_ode: return "dicke-ode";
  }
  return "?";
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::gpe: return "gpe";
    case Engine::dicke_semiclassical: return "dicke-semiclassical";
    case Engine::dicke_exact: return "dicke-exact";
    case Engine::boundary: return "boundary";
  }
  return "?";
}

gpe::Grid2D GridSpec::make() const {
  if (!(wavelengths_x > 0.0) || !(wavelengths_z > 0.0)) throw ConfigError("grid extents must be > 0");
  return gpe::Grid2D::make(n_x, n_z, constants::two_pi * wavelengths_x, constants::two_pi * wavelengths_z);
}

RunConfig resolve_config(Command command, KeyValues kv) {
  RunConfig cfg;
  cfg.command = command;
  cfg.physics = take_experiment_params(kv);
  const auto units = RecoilUnits::from(cfg.physics);
  Settings s(kv, cfg.resolved);

  if (auto seed = kv.take_u64s("seed")) {
    if (seed->size() != 1) throw ConfigError("seed must be a single unsigned integer");
    cfg.seed = seed->front();
  }
  cfg.resolved["seed"] = std::to_string(cfg.seed);

  std::string default_engine;
  std::vector<const char*> engines = {"gpe"};
  switch (command) {
    case Command::ramp:
      default_engine = "gpe";
      engines = {"gpe", "dicke-semiclassical"};
      break;
    case Command::diagram:
    case Command::ensemble:
      default_engine = "gpe";
      engines = {"gpe"};
      break;
    case Command::boundary:
      default_engine = "boundary";
      engines = {"boundary"};
      break;
    case Command::dicke_ed:
      default_engine = "dicke-exact";
      engines = {"dicke-exact"};
      break;
    case Command::dicke_ode:
      default_engine = "dicke-semiclassical";
      engines = {"dicke-semiclassical"};
      break;
  }
  const auto engine = s.choice("engine", default_engine, engines);
  cfg.engine = engine == "gpe"                   ? Engine::gpe
               : engine == "dicke-semiclassical" ? Engine::dicke_semiclassical
               : engine == "dicke-exact"         ? Engine::dicke_exact
                                                 : Engine::boundary;

  switch (command) {
    case Command::ramp:
      read_ramp(s, cfg.ramp);
      read_threshold(s, cfg.threshold);
      if (cfg.engine == Engine::gpe) {
        read_grid(s, cfg.grid);
        read_gpe(s, cfg.gpe, units);
        cfg.snapshot_powers = s.reals("snapshot.powers", {});
      } else {
        cfg.dicke.dt = s.optional_real("semiclassical.dt");
        cfg.dicke.noise = s.real("semiclassical.noise", cfg.dicke.noise);
        cfg.dicke.record_every = s.positive("semiclassical.record_every", 100);
        if (cfg.dicke.dt && !(*cfg.dicke.dt > 0.0)) throw ConfigError("semiclassical.dt must be > 0");
      }
      break;
    case Command::diagram:
      read_grid(s, cfg.grid);
      read_gpe(s, cfg.gpe, units);
      read_ramp(s, cfg.ramp);
      read_threshold(s, cfg.threshold);
      cfg.sweep.delta_c = s.angular_list("sweep.delta_c", {cfg.physics.pump_cavity_detuning});
      cfg.sweep.powers = s.reals("sweep.powers", {});
      cfg.sweep.caps = s.reals("sweep.caps", {});
      cfg.sweep.window = s.optional_real("sweep.window");
      cfg.sweep.frustration_threshold = s.real("sweep.frustration_threshold", cfg.sweep.frustration_threshold);
      if (!cfg.sweep.caps.empty() && cfg.sweep.caps.size() != cfg.sweep.delta_c.size()) {
        throw ConfigError("sweep.caps must have one entry per detuning");
      }
      if (cfg.sweep.window && !(*cfg.sweep.window > 0.0)) throw ConfigError("sweep.window must be > 0");
      break;
    case Command::ensemble:
      read_grid(s, cfg.grid);
      read_gpe(s, cfg.gpe, units);
      cfg.ensemble.count = s.positive("ensemble.count", cfg.ensemble.count);
      cfg.ensemble.relative = s.flag("ensemble.relative", true);
      cfg.ensemble.power = s.real("ensemble.power", cfg.ensemble.relative ? 1.5 : 0.0);
      cfg.ensemble.mirrored = static_cast<int>(s.integer("ensemble.mirrored", 0));
      if (cfg.ensemble.mirrored < 0 || cfg.ensemble.mirrored > cfg.ensemble.count) {
        throw ConfigError("ensemble.mirrored must be in [0, ensemble.count]");
      }
      if (!(cfg.ensemble.power > 0.0)) throw ConfigError("ensemble.power must be > 0");
      break;
    case Command::boundary:
      cfg.boundary_delta_c = s.angular_list("boundary.delta_c", {cfg.physics.pump_cavity_detuning});
      cfg.quadrature.rel_tol = s.real("boundary.rel_tol", cfg.quadrature.rel_tol);
      cfg.quadrature.max_depth = static_cast<unsigned>(s.positive("boundary.max_depth", cfg.quadrature.max_depth));
      break;
    case Command::dicke_ed:
    case Command::dicke_ode:
      read_dicke(s, cfg.dicke, command);
      break;
  }
  kv.reject_unconsumed();
  return cfg;
}

void write_resolved(std::ostream& os, const RunConfig& cfg) {
  os << "# selforg " << command_name(cfg.command) << '\n';
  write_experiment_params(os, cfg.physics);
  for (const auto& [key, value] : cfg.resolved) os << key << " = " << value << '\n';
}

std::string resolved_text(const RunConfig& cfg) {
  std::ostringstream os;
  write_resolved(os, cfg);
  return os.str();
}

}  // namespace selforg::run
