#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pilotwave/altcurrent.hpp"
#include "pilotwave/current.hpp"
#include "pilotwave/epstein.hpp"
#include "pilotwave/io.hpp"
#include "pilotwave/solver.hpp"
#include "pilotwave/trajectory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pilotwave;

namespace {

enum Exit { kOk = 0, kVerdict = 1, kUsage = 2, kNumerical = 3 };

struct Options {
  std::string hamiltonian;
  std::string state;
  std::string grid;
  std::string domain;
  std::optional<double> dt;
  std::optional<int> steps;
  std::optional<int> stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> particles;
  std::optional<double> time;
  std::string out;
  std::string format = "text";
  std::string methods = "canonical,epstein,born-jordan,second-order";
  bool hermitize = false;
};

struct Run {
  DifferentialOperator h;
  GridState psi;
  EvolutionSpec evolution;
  std::uint64_t seed = 1;
  std::size_t particles = 100;
};

DifferentialOperator load_operator(const Options& o) {
  auto h = load_hamiltonian(o.hamiltonian);
  return o.hermitize ? hermitize(h) : h;
}

// Flags > state file > defaults.
Run prepare(const Options& o) {
  Run run;
  run.h = load_operator(o);
  const auto spec = load_state_spec(o.state);
  RunConfig config;
  config.points = std::vector<std::size_t>{256};
  config.domain = std::vector<std::pair<double, double>>{{-10.0, 10.0}};
  config.dt = 1e-3;
  config.steps = 1000;
  config.stride = 10;
  config.seed = 1;
  config.trajectories = 100;
  config.merge(spec.config);
  RunConfig flags;
  if (!o.grid.empty()) flags.points = parse_points(o.grid);
  if (!o.domain.empty()) flags.domain = parse_domain(o.domain);
  flags.dt = o.dt;
  flags.steps = o.steps;
  flags.stride = o.stride;
  flags.seed = o.seed;
  flags.trajectories = o.particles;
  flags.time = o.time;
  config.merge(flags);

  const Grid grid = make_grid(run.h.dimension(), *config.points, *config.domain);
  run.psi = build_state(spec, grid);
  run.evolution.dt = *config.dt;
  run.evolution.steps = *config.steps;
  run.evolution.stride = *config.stride;
  if (config.time) {
    if (!(*config.time >= 0.0)) throw std::invalid_argument("time must be non-negative");
    run.evolution.steps = static_cast<int>(std::ceil(*config.time / *config.dt - 1e-9));
  }
  run.seed = *config.seed;
  run.particles = *config.trajectories;
  return run;
}

int cmd_check(const Options& o) {
  const auto h = load_hamiltonian(o.hamiltonian);
  const auto report = check_hermiticity(h);
  if (o.format == "json") {
    json slots = json::array();
    for (const auto& s : report.slots) {
      slots.push_back({{"n", s.index.to_string()},
                       {"coefficient", s.coefficient.to_string()},
                       {"adjoint", s.adjoint_coefficient.to_string()},
                       {"ok", s.ok},
                       {"max_difference", s.max_difference}});
    }
    std::cout << json{{"hermitian", report.hermitian}, {"slots", slots}}.dump(2) << "\n";
  } else {
    std::cout << "hermitian: " << (report.hermitian ? "yes" : "no") << "\n";
    for (const auto& s : report.slots) {
      std::cout << "  slot " << s.index.to_string() << ": " << (s.ok ? "ok" : "violated") << "  h = "
                << s.coefficient.to_string() << "  adjoint = " << s.adjoint_coefficient.to_string();
      if (!s.ok) std::cout << "  (max difference " << s.max_difference << ")";
      std::cout << "\n";
    }
  }
  return report.hermitian ? kOk : kVerdict;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
}

int cmd_derive(const Options& o) {
  const auto h = load_operator(o);
  if (!is_hermitian(h)) {
    std::cerr << "error: the Hamiltonian is not Hermitian; see `pilotwave check`, or rerun with --hermitize\n";
    return kVerdict;
  }
  const auto table = derive_current_table(h);
  emit(o, o.format == "latex" ? table.to_latex() : table.to_json());
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto run = prepare(o);
  const fs::path dir = o.out.empty() ? fs::path("pilotwave_out") : fs::path(o.out);
  fs::create_directories(dir);
  const auto evolution = evolve(run.h, run.psi, run.evolution);
  const auto& snaps = evolution.snapshots;
  const bool small = run.psi.grid.size() <= 4096;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(4) << std::setfill('0') << k;
    write_file(dir / (name.str() + ".json"), snapshot_to_json(snaps[k]));
    if (small) write_file(dir / (name.str() + ".csv"), snapshot_to_csv(snaps[k]));
  }
  write_file(dir / "density.svg", density_svg(snaps));

  double drift = 0.0;
  for (double d : evolution.norm_drift) drift = std::max(drift, std::abs(d));
  json summary = {{"snapshots", snaps.size()},
                  {"final_time", snaps.back().time},
                  {"stability_number", evolution.stability_number},
                  {"max_norm_drift", drift}};
  if (run.particles > 0 && snaps.size() > 1) {
    const auto table = derive_current_table(run.h);
    auto initial = sample_density(run.psi.grid, run.psi.density(), run.particles, run.seed, run.psi.time);
    initial.source = "equilibrium";
    const auto ensemble = integrate_trajectories(snaps, table, initial);
    write_file(dir / "trajectories.csv", trajectories_to_csv(ensemble));
    write_file(dir / "trajectories.svg", trajectory_svg(ensemble, run.psi.grid));
    summary["particles"] = ensemble.count();
    summary["truncated_fraction"] = ensemble.truncated_fraction();
    summary["seed"] = run.seed;
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int cmd_compare(const Options& o) {
  std::vector<std::string> methods;
  std::stringstream ss(o.methods);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m.empty()) continue;
    if (m != "canonical" && m != "epstein" && m != "born-jordan" && m != "second-order") {
      std::cerr << "error: unknown method '" << m << "'\n";
      return kUsage;
    }
    methods.push_back(m);
  }
  if (methods.empty()) {
    std::cerr << "error: --methods is empty\n";
    return kUsage;
  }
  const auto run = prepare(o);
  const auto& psi = run.psi;
  const double t = psi.time;
  std::vector<std::pair<std::string, VectorField>> fields;
  json report = {{"time", t}, {"methods", json::object()}, {"pairs", json::array()}};
  report["max_abs_source"] = max_abs(source_term(run.h, psi, t));
  for (const auto& m : methods) {
    try {
      VectorField j;
      if (m == "canonical") j = eval_current(derive_current_table(run.h), psi, t);
      if (m == "epstein") j = nonlocal_current(run.h, psi, t);
      if (m == "born-jordan") j = born_jordan_current(run.h, psi, t);
      if (m == "second-order") j = second_order_current(run.h, psi, t);
      report["methods"][m] = {{"status", "ok"}, {"max_abs", j.max_abs()}};
      fields.emplace_back(m, std::move(j));
    } catch (const NotHermitianError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      report["methods"][m] = {{"status", "inapplicable"}, {"reason", e.what()}};
    }
  }
  for (std::size_t a = 0; a < fields.size(); ++a) {
    for (std::size_t b = a + 1; b < fields.size(); ++b) {
      const auto cmp = compare_fields(fields[a].second, fields[b].second);
      report["pairs"].push_back({{"a", fields[a].first},
                                 {"b", fields[b].first},
                                 {"max_abs_diff", cmp.max_abs_diff},
                                 {"max_div_diff", cmp.max_div_diff}});
    }
  }
  if (o.format == "json") {
    emit(o, report.dump(2) + "\n");
    return kOk;
  }
  std::ostringstream os;
  os << "max |I| = " << report["max_abs_source"].get<double>() << "\n";
  for (const auto& m : methods) {
    const auto& r = report["methods"][m];
    os << m << ": " << r["status"].get<std::string>();
    if (r.contains("reason")) os << " (" << r["reason"].get<std::string>() << ")";
    os << "\n";
  }
  for (const auto& p : report["pairs"]) {
    os << p["a"].get<std::string>() << " vs " << p["b"].get<std::string>()
       << ": max_abs_diff = " << p["max_abs_diff"].get<double>()
       << ", max_div_diff = " << p["max_div_diff"].get<double>() << "\n";
  }
  emit(o, os.str());
  return kOk;
}

int cmd_equivariance(const Options& o) {
  const auto run = prepare(o);
  EquivarianceSpec spec;
  spec.particles = o.particles.value_or(5000);
  spec.seed = run.seed;
  spec.evolution = run.evolution;
  const auto r = equivariance_test(run.h, run.psi, spec);
  const double noise = 1.63 / std::sqrt(static_cast<double>(r.particles));
  const bool pass = r.valid && r.ks_distance < std::max(2.0 * r.baseline_ks, noise);
  json report = {{"ks_distance", r.ks_distance},     {"baseline_ks", r.baseline_ks},
                 {"ks_noise_floor", noise},          {"truncated_fraction", r.truncated_fraction},
                 {"particles", r.particles},         {"final_time", r.final_time},
                 {"seed", spec.seed},                {"valid", r.valid},
                 {"pass", pass}};
  if (o.format == "json") {
    emit(o, report.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "KS distance at t = " << r.final_time << ": " << r.ks_distance << "\n"
       << "sampler KS at t = 0: " << r.baseline_ks << "\n"
       << "truncated fraction: " << r.truncated_fraction << (r.valid ? "" : " (report invalid: above 10%)") << "\n"
       << "verdict: " << (pass ? "pass" : "fail") << "\n";
    emit(o, os.str());
  }
  return pass ? kOk : kVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probability currents and guidance equations for differential-operator Hamiltonians"};
  app.require_subcommand(1);
  Options o;

  auto hamiltonian = [&](CLI::App* cmd) {
    cmd->add_option("hamiltonian", o.hamiltonian, "Hamiltonian file")->required()->check(CLI::ExistingFile);
  };
  auto state = [&](CLI::App* cmd) {
    cmd->add_option("state", o.state, "state file")->required()->check(CLI::ExistingFile);
  };
  auto run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--grid", o.grid, "points per axis, e.g. 256 or 64,32");
    cmd->add_option("--domain", o.domain, "box per axis, e.g. -10:10 or -5:5,-4:4");
    cmd->add_option("--dt", o.dt, "time step");
    cmd->add_option("--steps", o.steps, "number of steps");
    cmd->add_option("--stride", o.stride, "steps between snapshots");
    cmd->add_option("--seed", o.seed, "sampler seed");
    cmd->add_option("--time", o.time, "final time (sets steps = T/dt)");
    cmd->add_flag("--hermitize", o.hermitize, "replace H by (H + H^dagger)/2");
    cmd->add_option("--out", o.out, "output file or directory");
  };

  auto* check = app.add_subcommand("check", "Hermiticity verdict and per-slot report");
  hamiltonian(check);
  check->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* derive = app.add_subcommand("derive", "current table of a Hermitian Hamiltonian");
  hamiltonian(derive);
  std::string derive_format = "json";
  derive->add_option("--format", derive_format, "json or latex")->check(CLI::IsMember({"json", "latex"}));
  derive->add_flag("--hermitize", o.hermitize, "replace H by (H + H^dagger)/2");
  derive->add_option("--out", o.out, "output file");

  auto* simulate = app.add_subcommand("simulate", "evolve psi and guide an equilibrium ensemble");
  hamiltonian(simulate);
  state(simulate);
  run_flags(simulate);
  simulate->add_option("--trajectories", o.particles, "number of trajectories (0 to skip)");

  auto* compare = app.add_subcommand("compare", "compare current constructions on one state");
  hamiltonian(compare);
  state(compare);
  run_flags(compare);
  compare->add_option("--methods", o.methods, "comma list of canonical,epstein,born-jordan,second-order");
  compare->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* equivariance = app.add_subcommand("equivariance", "KS test of |psi|^2 equivariance");
  hamiltonian(equivariance);
  state(equivariance);
  run_flags(equivariance);
  equivariance->add_option("--particles", o.particles, "ensemble size (default 5000)");
  equivariance->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  if (derive->parsed()) o.format = derive_format;

  try {
    if (check->parsed()) return cmd_check(o);
    if (derive->parsed()) return cmd_derive(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (compare->parsed()) return cmd_compare(o);
    return cmd_equivariance(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NotHermitianError& e) {
    std::cerr << "error: " << e.what() << "\nrerun with --hermitize to use (H + H^dagger)/2\n";
    return kVerdict;
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const SolvabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
