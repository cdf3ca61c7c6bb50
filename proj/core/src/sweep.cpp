#include "selforg/sweep.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "selforg/boundary.hpp"
#include "selforg/constants.hpp"
#include "selforg/dicke.hpp"
#include "selforg/error.hpp"
#include "selforg/gpe.hpp"
#include "selforg/rng.hpp"
#include "selforg/version.hpp"

namespace selforg::run {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Writes through a temporary file so a killed run never leaves a torn file.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw EngineError("cannot write " + tmp.string());
    body(os);
    os.flush();
    if (!os) throw EngineError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void note(const RunContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << std::endl;
}

bool stopped(const RunContext& ctx) { return ctx.stop && ctx.stop->load(); }

// Runs task(i) for i in [0, n) on up to `workers` threads. Items are
// claimed in order; once a stop is requested no new item starts.
void parallel_for(std::size_t n, const RunContext& ctx, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (stopped(ctx)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      task(i);
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, ctx.workers), n));
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------- GPE setup

struct GpeSetup {
  gpe::Grid2D grid;
  gpe::CondensateField reference;  // ground state without pump
};

gpe::GpeModel model_for(const RunConfig& cfg, double delta_c) {
  auto p = cfg.physics;
  p.pump_cavity_detuning = delta_c;
  return gpe::GpeModel::from_experiment(p, cfg.gpe.model);
}

GpeSetup prepare_gpe(const RunConfig& cfg) {
  GpeSetup s;
  s.grid = cfg.grid.make();
  const auto m = model_for(cfg, cfg.physics.pump_cavity_detuning);
  gpe::validate_grid(s.grid, m);
  auto start = gpe::initial_state(s.grid, m);
  if (cfg.gpe.relax) {
    s.reference =
        gpe::imaginary_time_ground_state(std::move(start), m, gpe::PumpState::from_power(m, 0.0), cfg.gpe.imaginary)
            .field;
  } else {
    s.reference = std::move(start);
  }
  return s;
}

struct Prediction {
  std::optional<double> power;  // threshold at this detuning
  double scale{};               // reference for relative powers
};

// Relative powers refer to the predicted threshold; where the shifted
// detuning is positive (no transition) they refer to the threshold at the
// mirrored shifted detuning -|D|.
Prediction predict(const RunConfig& cfg, const GpeSetup& s, double delta_c) {
  auto p = cfg.physics;
  p.pump_cavity_detuning = delta_c;
  const auto m = gpe::GpeModel::from_experiment(p, cfg.gpe.model);
  const auto ov = gpe::overlap_integrals_2d(s.reference, m, p);
  Prediction out;
  const auto cp = boundary::critical_pump(delta_c, ov, p);
  if (cp.threshold) out.power = cp.threshold->power;
  const double mirrored = p.single_atom_lightshift * ov.bunching - std::abs(cp.shifted_detuning);
  const auto ref = boundary::critical_pump(mirrored, ov, p);
  out.scale = ref.threshold ? ref.threshold->power : 0.0;
  if (!(out.scale > 0.0)) out.scale = 0.0;
  return out;
}

double relative_scale(const RunConfig& cfg, const Prediction& pred, bool relative) {
  if (!relative) return 1.0;
  if (!(pred.scale > 0.0)) {
    throw ConfigError("relative powers need a predicted threshold, which requires nonzero lightshift, "
                      "calibration and shifted detuning");
  }
  (void)cfg;
  return pred.scale;
}

gpe::CondensateField relaxed_start(const RunConfig& cfg, const gpe::CondensateField& reference,
                                   const gpe::GpeModel& m, double power) {
  if (!cfg.gpe.relax || power <= 0.0) return reference;
  return gpe::imaginary_time_ground_state(reference, m, gpe::PumpState::from_power(m, power), cfg.gpe.imaginary)
      .field;
}

gpe::RealTimeOptions real_time_options(const RunConfig& cfg, const gpe::GpeModel& m) {
  gpe::RealTimeOptions o;
  o.dt = m.units.time(cfg.gpe.dt);
  o.record_every = cfg.gpe.record_every;
  o.threshold = cfg.threshold;
  return o;
}

void write_momentum_csv(std::ostream& os, const gpe::MomentumSpectrum& s) {
  os << "px_over_hk,pz_over_hk,weight\n";
  for (int iz = 0; iz < s.grid.n_z; ++iz) {
    for (int ix = 0; ix < s.grid.n_x; ++ix) {
      os << format_double(s.grid.kx(ix)) << ',' << format_double(s.grid.kz(iz)) << ','
         << format_double(s.weight[s.grid.index(ix, iz)]) << '\n';
    }
  }
}

RampReport ramp_gpe(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto setup = prepare_gpe(cfg);
  const double delta_c = cfg.physics.pump_cavity_detuning;
  const auto m = model_for(cfg, delta_c);
  const auto pred = predict(cfg, setup, delta_c);
  const double scale = relative_scale(cfg, pred, cfg.ramp.relative);

  double p_start = cfg.ramp.p_start * scale;
  double p_end = cfg.ramp.p_end * scale;
  if (cfg.ramp.cap) {
    p_start = std::min(p_start, *cfg.ramp.cap);
    p_end = std::min(p_end, *cfg.ramp.cap);
  }
  auto psi = relaxed_start(cfg, setup.reference, m, p_start);
  gpe::seed_noise(psi, derive_seed(cfg.seed, 0), cfg.gpe.noise);

  const auto ramp = gpe::PumpRamp::linear(m.units.time(cfg.ramp.duration), p_start, p_end, m.units.time(cfg.ramp.hold));
  auto opts = real_time_options(cfg, m);
  for (double p : cfg.snapshot_powers) opts.snapshot_powers.push_back(p * scale);
  note(ctx, "ramp: " + format_double(p_start) + " W -> " + format_double(p_end) + " W");
  const auto traj = gpe::real_time_evolve(std::move(psi), ramp, m, opts);

  write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) { gpe::write_trajectory_csv(os, traj, m); });
  log.files.push_back("trajectory.csv");

  RampReport rep;
  rep.critical_power = traj.critical_power;
  rep.predicted_power = pred.power;
  rep.baseline_photons = traj.baseline_photons;
  rep.snapshots = traj.snapshots.size();

  if (!traj.snapshots.empty()) {
    fs::create_directories(ctx.out / "snapshots");
    std::ostringstream index;
    index << "index,t,P,file\n";
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const auto& snap = traj.snapshots[k];
      const std::string stem = "snapshots/snapshot_" + std::to_string(k);
      gpe::write_snapshot(ctx.out / (stem + ".bin"), snap.field);
      const auto spec = gpe::momentum_spectrum(snap.field);
      write_file(ctx.out / ("snapshots/peaks_" + std::to_string(k) + ".csv"),
                 [&](std::ostream& os) { gpe::write_peaks_csv(os, gpe::momentum_peaks(spec)); });
      write_file(ctx.out / ("snapshots/spectrum_" + std::to_string(k) + ".csv"),
                 [&](std::ostream& os) { write_momentum_csv(os, spec); });
      index << k << ',' << format_double(m.units.time_si(snap.t)) << ',' << format_double(snap.power) << ','
            << stem << ".bin\n";
      log.files.push_back(stem + ".bin");
    }
    write_file(ctx.out / "snapshots.csv", [&](std::ostream& os) { os << index.str(); });
    log.files.push_back("snapshots.csv");
  }
  return rep;
}

RampReport ramp_semiclassical(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto& p = cfg.physics;
  const auto d = derive(p);
  const double wr = d.recoil_frequency;
  const double n_atoms = p.atom_number;
  dicke::DickeParams dp;
  dp.omega = d.cavity_frequency / wr;
  dp.omega0 = 2.0;
  dp.kappa = p.cavity_decay / wr;
  dp.atom_number = static_cast<int>(std::min(n_atoms, 2.0e9));
  dp.validate();

  auto lambda_of_power = [&](double power) { return eta_from_power(p, power) / wr * std::sqrt(n_atoms) / 2.0; };
  std::optional<double> predicted;
  if (const auto lc = dicke::critical_coupling(dp.omega, dp.omega0, dp.kappa)) {
    predicted = power_from_eta(p, 2.0 * *lc / std::sqrt(n_atoms) * wr);
  }
  double scale = 1.0;
  if (cfg.ramp.relative) {
    if (!predicted) throw ConfigError("relative ramp: no transition at this detuning (omega <= 0)");
    scale = *predicted;
  }
  double p_start = cfg.ramp.p_start * scale, p_end = cfg.ramp.p_end * scale;
  if (cfg.ramp.cap) {
    p_start = std::min(p_start, *cfg.ramp.cap);
    p_end = std::min(p_end, *cfg.ramp.cap);
  }
  const auto ramp = gpe::PumpRamp::linear(d.recoil_frequency * cfg.ramp.duration, p_start, p_end,
                                          d.recoil_frequency * cfg.ramp.hold);
  const double fastest = std::max({std::abs(dp.omega), dp.omega0, dp.kappa, lambda_of_power(ramp.max_power())});
  const double dt = cfg.dicke.dt ? *cfg.dicke.dt * wr : 0.02 / fastest;
  auto lambda_at = [&](double t) { return lambda_of_power(ramp.power(t)); };
  const auto traj = dicke::integrate_semiclassical(dicke::seeded_state(derive_seed(cfg.seed, 0), cfg.dicke.noise), dp,
                                                   lambda_at, ramp.duration(), dt, cfg.dicke.record_every);

  ThresholdDetector detector(cfg.threshold, static_cast<long long>(traj.points.size()));
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const auto& pt = traj.points[i];
    detector.feed(static_cast<long long>(i), ramp.power(pt.t), pt.photon_fraction * n_atoms);
  }
  auto out = traj;
  for (auto& pt : out.points) pt.t /= wr;
  write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) { dicke::write_trajectory_csv(os, out); });
  log.files.push_back("trajectory.csv");

  RampReport rep;
  rep.critical_power = detector.critical_power();
  rep.predicted_power = predicted;
  rep.baseline_photons = detector.baseline();
  return rep;
}

// -------------------------------------------------------------- ensemble

EnsembleRecord ensemble_member(const RunConfig& cfg, const GpeSetup& setup, const gpe::GpeModel& m,
                               const gpe::PumpState& pump, std::size_t index, bool mirrored) {
  EnsembleRecord r;
  r.index = index;
  r.seed = derive_seed(cfg.seed, index);
  r.mirrored = mirrored;
  auto psi = setup.reference;
  gpe::seed_noise(psi, r.seed, cfg.gpe.noise, mirrored);
  const auto gs = gpe::imaginary_time_ground_state(std::move(psi), m, pump, cfg.gpe.imaginary);
  r.theta = gs.cavity.theta;
  r.photons = gs.cavity.photons();
  r.steps = gs.steps;
  return r;
}

}  // namespace

// ------------------------------------------------------------------ ramp --

RampReport run_ramp(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  RampReport rep = cfg.engine == Engine::gpe ? ramp_gpe(cfg, ctx, log) : ramp_semiclassical(cfg, ctx, log);
  write_file(ctx.out / "threshold.csv", [&](std::ostream& os) {
    os << "p_cr_w,p_cr_pred_w,detected,baseline_nphoton\n"
       << opt(rep.critical_power) << ',' << opt(rep.predicted_power) << ',' << (rep.critical_power ? 1 : 0) << ','
       << format_double(rep.baseline_photons) << '\n';
  });
  log.files.push_back("threshold.csv");
  return rep;
}

// --------------------------------------------------------------- diagram --

void write_sweep_header(std::ostream& os) {
  os << "index,delta_c_hz,power_w,mean_nphoton,theta_final,threshold,p_cr_w,p_cr_pred_w,oscillation,frustrated,"
        "seed,status\n";
}

void write_sweep_row(std::ostream& os, const SweepRecord& r) {
  os << r.index << ',' << format_double(r.delta_c / constants::two_pi) << ',' << format_double(r.power) << ',';
  if (r.ok) {
    os << format_double(r.mean_photons) << ',' << format_double(r.theta_final) << ',' << (r.threshold ? 1 : 0)
       << ',' << opt(r.critical_power) << ',' << opt(r.predicted_power) << ',' << format_double(r.oscillation)
       << ',' << (r.frustrated ? 1 : 0);
  } else {
    os << ",,,,,,";
  }
  os << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << '\n';
}

SweepRecord parse_sweep_row(const std::string& line) {
  std::vector<std::string> f;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) f.push_back(item);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 12) throw ConfigError("malformed sweep row: " + line);
  auto num = [](const std::string& s) { return parse_double(s, "sweep row"); };
  auto optnum = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return num(s);
  };
  SweepRecord r;
  r.index = static_cast<std::size_t>(std::stoull(f[0]));
  r.delta_c = num(f[1]) * constants::two_pi;
  r.power = num(f[2]);
  r.ok = f[11] == "ok";
  if (r.ok) {
    r.mean_photons = num(f[3]);
    r.theta_final = num(f[4]);
    r.threshold = f[5] == "1";
    r.critical_power = optnum(f[6]);
    r.predicted_power = optnum(f[7]);
    r.oscillation = num(f[8]);
    r.frustrated = f[9] == "1";
  }
  r.seed = std::stoull(f[10]);
  return r;
}

std::vector<SweepRecord> run_phase_diagram(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto& sw = cfg.sweep;
  const std::size_t n_p = sw.powers.size();
  const std::size_t total = sw.delta_c.size() * n_p;

  // Analytic overlay from the Thomas-Fermi overlaps.
  const auto curve = boundary::boundary_curve(sw.delta_c, cfg.physics);
  write_file(ctx.out / "boundary.csv", [&](std::ostream& os) { boundary::write_boundary_csv(os, curve); });
  log.files.push_back("boundary.csv");

  std::vector<std::optional<SweepRecord>> records(total);
  const fs::path points_dir = ctx.out / "points";
  fs::create_directories(points_dir);
  auto point_path = [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%05zu.csv", i);
    return points_dir / name;
  };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < total; ++i) {
    std::ifstream in(point_path(i));
    std::string header, row;
    if (in && std::getline(in, header) && std::getline(in, row)) {
      auto r = parse_sweep_row(row);
      if (r.ok && r.index == i) {
        records[i] = r;
        log.points.push_back({i, 0.0, true, "ok", {}});
        continue;
      }
    }
    todo.push_back(i);
  }

  if (!todo.empty()) {
    const auto setup = prepare_gpe(cfg);
    std::mutex sink;
    std::atomic<std::size_t> done{total - todo.size()};
    const double window = sw.window ? *sw.window : (cfg.ramp.hold > 0.0 ? cfg.ramp.hold : 0.25 * cfg.ramp.duration);

    parallel_for(todo.size(), ctx, [&](std::size_t k) {
      const std::size_t i = todo[k];
      const std::size_t id = i / n_p;
      const double delta_c = sw.delta_c[id];
      SweepRecord r;
      r.index = i;
      r.delta_c = delta_c;
      r.seed = derive_seed(cfg.seed, i);
      PointLog pl{i, 0.0, false, "ok", {}};
      const auto t0 = Clock::now();
      try {
        const auto m = model_for(cfg, delta_c);
        const auto pred = predict(cfg, setup, delta_c);
        const double scale = relative_scale(cfg, pred, cfg.ramp.relative);
        double p_end = sw.powers[i % n_p] * scale;
        double p_start = cfg.ramp.p_start * scale;
        std::optional<double> cap = cfg.ramp.cap;
        if (!sw.caps.empty() && sw.caps[id] > 0.0) cap = cap ? std::min(*cap, sw.caps[id]) : sw.caps[id];
        if (cap) {
          p_end = std::min(p_end, *cap);
          p_start = std::min(p_start, *cap);
        }
        r.power = p_end;
        r.predicted_power = pred.power;

        auto psi = relaxed_start(cfg, setup.reference, m, p_start);
        gpe::seed_noise(psi, r.seed, cfg.gpe.noise);
        const auto ramp =
            gpe::PumpRamp::linear(m.units.time(cfg.ramp.duration), p_start, p_end, m.units.time(cfg.ramp.hold));
        const auto traj = gpe::real_time_evolve(std::move(psi), ramp, m, real_time_options(cfg, m));
        const auto tail = gpe::photon_trace(traj, ramp.duration() - m.units.time(window));
        double mean = 0.0;
        for (double v : tail) mean += v;
        r.mean_photons = tail.empty() ? 0.0 : mean / static_cast<double>(tail.size());
        r.theta_final = traj.samples.back().cavity.theta;
        r.threshold = traj.critical_power.has_value();
        r.critical_power = traj.critical_power;
        r.oscillation = oscillation_metric(tail);
        r.frustrated = r.threshold && r.oscillation > sw.frustration_threshold;
        write_file(point_path(i), [&](std::ostream& os) {
          write_sweep_header(os);
          write_sweep_row(os, r);
        });
      } catch (const std::exception& e) {
        r.ok = false;
        pl.status = "failed";
        pl.error = e.what();
      }
      pl.wall_time = seconds_since(t0);
      std::lock_guard lock(sink);
      records[i] = r;
      log.points.push_back(pl);
      note(ctx, "diagram: point " + std::to_string(i) + " " + pl.status + " (" + std::to_string(++done) + "/" +
                    std::to_string(total) + ")");
    });
  }

  std::vector<SweepRecord> out;
  for (auto& r : records) {
    if (!r || !r->ok) log.complete = false;
    if (r) out.push_back(*r);
  }
  std::sort(log.points.begin(), log.points.end(), [](const PointLog& a, const PointLog& b) { return a.index < b.index; });
  write_file(ctx.out / "sweep.csv", [&](std::ostream& os) {
    write_sweep_header(os);
    for (const auto& r : out) write_sweep_row(os, r);
  });
  log.files.push_back("sweep.csv");
  return out;
}

// -------------------------------------------------------------- ensemble --

EnsembleSummary summarize(const std::vector<EnsembleRecord>& records) {
  EnsembleSummary s;
  double sum_pos = 0.0, sum_neg = 0.0;
  for (const auto& r : records) {
    if (!r.ok || r.mirrored) continue;
    ++s.count;
    if (r.sign() > 0) {
      ++s.positive;
      sum_pos += r.theta;
    } else if (r.sign() < 0) {
      ++s.negative;
      sum_neg -= r.theta;
    }
  }
  if (s.positive) s.mean_abs_positive = sum_pos / static_cast<double>(s.positive);
  if (s.negative) s.mean_abs_negative = sum_neg / static_cast<double>(s.negative);
  if (s.positive && s.negative) {
    s.relative_difference = std::abs(s.mean_abs_positive - s.mean_abs_negative) /
                            (0.5 * (s.mean_abs_positive + s.mean_abs_negative));
  }
  s.p_value = binomial_two_sided_p(s.positive, s.positive + s.negative);
  for (const auto& m : records) {
    if (!m.ok || !m.mirrored) continue;
    for (const auto& r : records) {
      if (r.ok && !r.mirrored && r.index == m.index) {
        ++s.mirrored_pairs;
        if (r.sign() != 0 && r.sign() == -m.sign()) ++s.mirrored_opposite;
      }
    }
  }
  return s;
}

EnsembleResult run_symmetry_ensemble(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto setup = prepare_gpe(cfg);
  const double delta_c = cfg.physics.pump_cavity_detuning;
  const auto m = model_for(cfg, delta_c);
  const auto pred = predict(cfg, setup, delta_c);
  const double power = cfg.ensemble.power * relative_scale(cfg, pred, cfg.ensemble.relative);
  const auto pump = gpe::PumpState::from_power(m, power);
  note(ctx, "ensemble: P = " + format_double(power) + " W");

  const std::size_t n = static_cast<std::size_t>(cfg.ensemble.count);
  const std::size_t tasks = n + static_cast<std::size_t>(cfg.ensemble.mirrored);
  std::vector<std::optional<EnsembleRecord>> slots(tasks);
  std::mutex sink;
  parallel_for(tasks, ctx, [&](std::size_t k) {
    const bool mirrored = k >= n;
    const std::size_t index = mirrored ? k - n : k;
    PointLog pl{k, 0.0, false, "ok", {}};
    const auto t0 = Clock::now();
    EnsembleRecord r;
    try {
      r = ensemble_member(cfg, setup, m, pump, index, mirrored);
    } catch (const std::exception& e) {
      r.index = index;
      r.seed = derive_seed(cfg.seed, index);
      r.mirrored = mirrored;
      r.ok = false;
      pl.status = "failed";
      pl.error = e.what();
    }
    pl.wall_time = seconds_since(t0);
    std::lock_guard lock(sink);
    slots[k] = r;
    log.points.push_back(pl);
  });

  EnsembleResult res;
  for (const auto& s : slots) {
    if (!s || !s->ok) log.complete = false;
    if (s) res.records.push_back(*s);
  }
  std::sort(log.points.begin(), log.points.end(), [](const PointLog& a, const PointLog& b) { return a.index < b.index; });
  res.summary = summarize(res.records);

  write_file(ctx.out / "ensemble.csv", [&](std::ostream& os) {
    os << "index,seed,mirrored,theta,sign,nphoton,steps,status\n";
    for (const auto& r : res.records) {
      os << r.index << ',' << r.seed << ',' << (r.mirrored ? 1 : 0) << ',';
      if (r.ok) {
        os << format_double(r.theta) << ',' << r.sign() << ',' << format_double(r.photons) << ',' << r.steps;
      } else {
        os << ",,,";
      }
      os << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
  });
  const auto& s = res.summary;
  write_file(ctx.out / "ensemble_summary.csv", [&](std::ostream& os) {
    os << "count,positive,negative,p_value,mean_abs_theta_pos,mean_abs_theta_neg,relative_difference,"
          "mirrored_pairs,mirrored_opposite,power_w\n"
       << s.count << ',' << s.positive << ',' << s.negative << ',' << format_double(s.p_value) << ','
       << format_double(s.mean_abs_positive) << ',' << format_double(s.mean_abs_negative) << ','
       << format_double(s.relative_difference) << ',' << s.mirrored_pairs << ',' << s.mirrored_opposite << ','
       << format_double(power) << '\n';
  });
  log.files.push_back("ensemble.csv");
  log.files.push_back("ensemble_summary.csv");
  return res;
}

// ----------------------------------------------------------------- other --

void run_boundary(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto tf = boundary::thomas_fermi(cfg.physics);
  const auto ov = boundary::overlap_integrals(tf, cfg.physics, cfg.quadrature);
  const auto curve = boundary::boundary_curve(cfg.boundary_delta_c, ov, cfg.physics);
  write_file(ctx.out / "boundary.csv", [&](std::ostream& os) { boundary::write_boundary_csv(os, curve); });
  write_file(ctx.out / "overlaps.csv", [&](std::ostream& os) {
    os << "n_eff,n_eff_error,bunching,bunching_error,interaction_energy_j,interaction_energy_error_j,"
          "dispersive_shift_hz,chemical_potential_j,radius_x_m,radius_y_m,radius_z_m\n"
       << format_double(ov.n_eff) << ',' << format_double(ov.n_eff_error) << ',' << format_double(ov.bunching)
       << ',' << format_double(ov.bunching_error) << ',' << format_double(ov.interaction_energy) << ','
       << format_double(ov.interaction_energy_error) << ','
       << format_double(cfg.physics.single_atom_lightshift * ov.bunching / constants::two_pi) << ','
       << format_double(tf.chemical_potential) << ',' << format_double(tf.radii[0]) << ','
       << format_double(tf.radii[1]) << ',' << format_double(tf.radii[2]) << '\n';
  });
  log.files.push_back("boundary.csv");
  log.files.push_back("overlaps.csv");
}

namespace {

dicke::DickeParams dicke_params(const RunConfig& cfg) {
  const auto& d = cfg.dicke;
  dicke::DickeParams p;
  if (d.from_experiment) {
    const auto dp = derive(cfg.physics);
    p.omega = dp.cavity_frequency / dp.recoil_frequency;
    p.omega0 = 2.0;
    p.kappa = cfg.command == Command::dicke_ed ? 0.0 : cfg.physics.cavity_decay / dp.recoil_frequency;
  } else {
    p.omega = d.omega;
    p.omega0 = d.omega0;
    p.kappa = d.kappa;
  }
  p.atom_number = d.atom_number;
  p.dispersive_shift = d.dispersive;
  p.lightshift = d.lightshift;
  p.validate();
  return p;
}

double dicke_lambda(const RunConfig& cfg, const dicke::DickeParams& p, double value) {
  if (!cfg.dicke.relative) return value;
  const auto lc = dicke::critical_coupling(p.omega, p.omega0, p.kappa);
  if (!lc) throw ConfigError("dicke.relative: no transition for omega <= 0");
  return value * *lc;
}

}  // namespace

void run_dicke_ed(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  const auto base = dicke_params(cfg);
  const auto& lambdas = cfg.dicke.lambda;
  std::vector<std::optional<dicke::EdRow>> rows(lambdas.size());
  std::mutex sink;
  parallel_for(lambdas.size(), ctx, [&](std::size_t i) {
    auto p = base;
    p.lambda = dicke_lambda(cfg, p, lambdas[i]);
    PointLog pl{i, 0.0, false, "ok", {}};
    const auto t0 = Clock::now();
    std::optional<dicke::EdRow> row;
    try {
      row = dicke::EdRow{p.lambda,
                         dicke::converged_ground_state(p, cfg.dicke.cutoff, cfg.dicke.tolerance, 10, cfg.dicke.max_cutoff)};
    } catch (const EngineError& e) {
      pl.status = "failed";
      pl.error = e.what();
    }
    pl.wall_time = seconds_since(t0);
    std::lock_guard lock(sink);
    rows[i] = row;
    log.points.push_back(pl);
  });
  std::vector<dicke::EdRow> done;
  for (const auto& r : rows) {
    if (r) {
      done.push_back(*r);
    } else {
      log.complete = false;
    }
  }
  std::sort(log.points.begin(), log.points.end(), [](const PointLog& a, const PointLog& b) { return a.index < b.index; });
  write_file(ctx.out / "observables.csv", [&](std::ostream& os) { dicke::write_observables_csv(os, done); });
  log.files.push_back("observables.csv");
}

void run_dicke_ode(const RunConfig& cfg, const RunContext& ctx, RunLog& log) {
  auto p = dicke_params(cfg);
  p.lambda = dicke_lambda(cfg, p, cfg.dicke.lambda.front());
  const double fastest = std::max({std::abs(p.omega), p.omega0, p.kappa, std::abs(p.lambda)});
  const double dt = cfg.dicke.dt ? *cfg.dicke.dt : 0.02 / fastest;
  const auto traj = dicke::integrate_semiclassical(dicke::seeded_state(derive_seed(cfg.seed, 0), cfg.dicke.noise), p,
                                                   cfg.dicke.t_final, dt, cfg.dicke.record_every);
  write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) { dicke::write_trajectory_csv(os, traj); });
  const auto lc = dicke::critical_coupling(p.omega, p.omega0, p.kappa);
  write_file(ctx.out / "steady.csv", [&](std::ostream& os) {
    os << "lambda,lambda_cr,photon_frac_final,photon_frac_fixed_point\n"
       << format_double(p.lambda) << ',' << opt(lc) << ',' << format_double(traj.final_state.photon_fraction())
       << ',' << format_double(dicke::steadystate_photon_fraction(p)) << '\n';
  });
  log.files.push_back("trajectory.csv");
  log.files.push_back("steady.csv");
}

// --------------------------------------------------------------- execute --

int execute(const RunConfig& cfg, const RunContext& ctx) {
  fs::create_directories(ctx.out);
  const auto resolved = resolved_text(cfg);
  const fs::path cfg_path = ctx.out / "config.resolved";
  if (fs::exists(cfg_path)) {
    std::ifstream in(cfg_path);
    std::stringstream ss;
    ss << in.rdbuf();
    if (ss.str() != resolved) {
      throw ConfigError("output directory " + ctx.out.string() + " holds a run with a different configuration");
    }
  } else {
    write_file(cfg_path, [&](std::ostream& os) { os << resolved; });
  }

  RunLog log;
  const auto t0 = Clock::now();
  std::string status = "complete";
  std::string error;
  std::exception_ptr failure;
  int code = exit_ok;
  try {
    switch (cfg.command) {
      case Command::ramp: run_ramp(cfg, ctx, log); break;
      case Command::diagram: run_phase_diagram(cfg, ctx, log); break;
      case Command::ensemble: run_symmetry_ensemble(cfg, ctx, log); break;
      case Command::boundary: run_boundary(cfg, ctx, log); break;
      case Command::dicke_ed: run_dicke_ed(cfg, ctx, log); break;
      case Command::dicke_ode: run_dicke_ode(cfg, ctx, log); break;
    }
    if (!log.complete || stopped(ctx)) {
      status = "partial";
      code = exit_partial;
    }
  } catch (const std::exception& e) {
    status = "failed";
    error = e.what();
    failure = std::current_exception();
  }

  nlohmann::json man;
  man["program"] = "selforg";
  man["version"] = version();
  man["git_hash"] = git_hash();
  man["command"] = command_name(cfg.command);
  man["engine"] = engine_name(cfg.engine);
  man["seed"] = cfg.seed;
  man["workers"] = ctx.workers;
  man["status"] = status;
  if (!error.empty()) man["error"] = error;
  man["wall_time_s"] = seconds_since(t0);
  man["files"] = log.files;
  auto& pts = man["points"] = nlohmann::json::array();
  for (const auto& p : log.points) {
    nlohmann::json j{{"index", p.index}, {"wall_time_s", p.wall_time}, {"resumed", p.resumed}, {"status", p.status}};
    if (!p.error.empty()) j["error"] = p.error;
    pts.push_back(j);
  }
  write_file(ctx.out / "manifest.json", [&](std::ostream& os) { os << man.dump(2) << '\n'; });

  if (failure) std::rethrow_exception(failure);
  return code;
}

}  // namespace selforg::run
