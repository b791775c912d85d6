#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cascade/certify.hpp"
#include "cascade/error.hpp"
#include "cascade/io.hpp"
#include "cascade/kernels.hpp"
#include "cascade/simulator.hpp"
#include "cascade/verify.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kInfeasible = 2, kUndetermined = 3, kMissing = 4 };

struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string out;
  std::optional<double> dx, dt;
  std::optional<std::uint64_t> seed;
  std::string kernels;  // verify-kernels only
};

json load(const fs::path& p) {
  if (!fs::exists(p)) throw MissingArtifact(p.string() + " not found");
  return read_json(p);
}

Scenario load_scenario(const Options& o) {
  json j = load(o.scenario);
  if (o.dx) j["simulation"]["dx"] = *o.dx;
  if (o.dt) j["simulation"]["dt"] = *o.dt;
  if (o.seed) j["search"]["seed"] = *o.seed;
  Scenario s = scenario_from_json(j);
  if (!o.out.empty()) s.output.dir = o.out;
  return s;
}

fs::path out_dir(const Scenario& s) { return fs::path(s.output.dir); }

json kernel_source(const Scenario& s) {
  const json j = to_json(s);
  return {{"plant", j["plant"]}, {"gains", j["gains"]}};
}

KernelSet load_kernels(const Scenario& s, const fs::path& path) {
  const json j = load(path);
  if (j.contains("source") && j["source"] != kernel_source(s))
    throw InvalidArgument(path.string() + " was built for a different plant or gains; rerun design");
  KernelSet ks = kernels_from_json(j.contains("kernels") ? j["kernels"] : j);
  if (ks.grid != s.grid())
    throw InvalidArgument(path.string() + " was built at dx = " + std::to_string(ks.dx()) + "; rerun design");
  return ks;
}

int cmd_design(const Options& o) {
  const Scenario s = load_scenario(o);
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSet ks = build_kernels(s.plant, s.gains, s.grid());
  const Certificate cert = minimize_beta(s.plant, s.gains, s.actuation, ks, s.tuning, s.search_config());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_json(out_dir(s) / "kernels.json", {{"source", kernel_source(s)}, {"kernels", to_json(ks)}});
  write_json(out_dir(s) / "certificate.json", to_json(cert));

  const auto& c = cert.constants;
  std::printf("zeta %.4f  c1 %.4f  c2 %.4f", c.zeta, c.c1, c.c2);
  if (s.actuation == Actuation::Neumann) std::printf("  c3 %.4f  xi %.4f", c.c3, c.xi);
  std::printf("  M1 %.4f  M2 %.4f\n", c.M1, c.M2);
  std::printf("status %s", std::string(to_string(cert.status)).c_str());
  if (cert.feasible()) {
    std::printf("  beta %.6f  delta %.6f  coefficients", cert.beta, cert.delta);
    for (double v : cert.admissible_coefficients()) std::printf(" %.4f", v);
  }
  std::printf("  (%.2f s)\n", secs);
  if (!cert.diagnostic.empty()) std::printf("%s\n", cert.diagnostic.c_str());

  switch (cert.status) {
    case CertificateStatus::Feasible:
      return kOk;
    case CertificateStatus::Infeasible:
      return kInfeasible;
    case CertificateStatus::Undetermined:
      return kUndetermined;
  }
  return kInternal;
}

// Sup over the initial window of |X|, ||u||^2 and ||u_x||^2.
struct InitialNorms {
  double X = 0.0, u = 0.0, ux = 0.0;
};

InitialNorms initial_norms(const InitialData& init, const UniformGrid& grid, double h) {
  InitialNorms n;
  constexpr int samples = 40;
  for (int i = 0; i <= samples; ++i) {
    const double theta = -h * i / samples;
    const Field f(grid, init.field(theta));
    n.X = std::max(n.X, init.X(theta).norm());
    n.u = std::max(n.u, norm_sq(f));
    n.ux = std::max(n.ux, derivative_norm_sq(f));
  }
  return n;
}

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

int cmd_simulate(const Options& o) {
  const Scenario s = load_scenario(o);
  const fs::path dir = out_dir(s);
  const KernelSet ks = load_kernels(s, dir / "kernels.json");
  const Certificate cert = certificate_from_json(load(dir / "certificate.json"));
  if (cert.actuation != s.actuation) throw InvalidArgument("certificate actuation does not match the scenario");

  const InitialData init = s.initial_data();
  SimulationOptions opt = s.simulation_options();
  if (s.simulation.monitor) {
    if (cert.feasible())
      opt.monitor = Monitor{cert.witness};
    else
      std::fprintf(stderr, "monitor requested but the certificate is %s; V is not recorded\n",
                   std::string(to_string(cert.status)).c_str());
  }

  const ControlLaw law(s.actuation, ks, s.plant.u_bar);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory tr = simulate(s.plant, law, init, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream csv(dir / "trajectory.csv");
    write_trajectory_csv(csv, tr);
  }
  if (s.output.field_dump_stride > 0) {
    std::ofstream csv(dir / "fields.csv");
    write_field_csv(csv, tr);
  }

  json summary;
  summary["scenario"] = s.name;
  summary["actuation"] = std::string(to_string(s.actuation));
  summary["dx"] = s.grid().dx();
  summary["dt"] = s.simulation.dt;
  summary["T"] = s.simulation.T;
  summary["certificate_status"] = std::string(to_string(cert.status));
  if (cert.feasible()) {
    const InitialNorms n = initial_norms(init, s.grid(), s.plant.h);
    const auto m = admissible_set_membership(
        cert, n.X, n.u, s.actuation == Actuation::Neumann ? std::optional<double>(n.ux) : std::nullopt);
    summary["membership"] = m.value;
    summary["inside"] = m.inside;
  } else {
    summary["membership"] = nullptr;
    summary["inside"] = nullptr;
  }
  summary["status"] = std::string(to_string(tr.status));
  summary["final_time"] = tr.times.empty() ? 0.0 : tr.times.back();
  summary["initial_norm_sq"] = tr.initial_norm_sq;
  summary["final_norm_sq"] = tr.final_norm_sq();
  summary["final_ratio"] = tr.initial_norm_sq > 0.0 ? tr.final_norm_sq() / tr.initial_norm_sq : 0.0;
  summary["max_norm_sq"] = tr.max_norm_sq;
  summary["max_abs_U"] = tr.max_abs_U;
  summary["saturated_steps"] = tr.saturated_steps;
  summary["saturated_samples_after_t1"] = tr.saturated_samples_after(1.0);
  summary["first_exceedance_1e3"] = optional_number(tr.first_exceedance(1e3));
  if (opt.monitor) {
    summary["monitor"] = {{"sup_V_initial", tr.sup_V_initial},
                          {"max_V_ratio", tr.max_V_ratio},
                          {"halanay_violations", tr.halanay_violations}};
  }
  summary["runtime_s"] = secs;
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const Options& o) {
  const Scenario s = load_scenario(o);
  const KernelSet ks =
      o.kernels.empty() ? build_kernels(s.plant, s.gains, s.grid()) : load_kernels(s, o.kernels);
  const auto checks = verify_all(s.plant, s.gains, ks, s.actuation, s.initial_data(), s.simulation.dt);

  json entries = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.pass();
    entries.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
    std::printf("%-20s %-4s %.3e (tol %.3e)\n", c.name.c_str(), c.pass() ? "ok" : "FAIL", c.value, c.tolerance);
  }
  write_json(out_dir(s) / "verify.json", {{"dx", ks.dx()}, {"pass", ok}, {"checks", entries}});
  return ok ? kOk : kInternal;
}

int cmd_report(const Options& o) {
  const Scenario s = load_scenario(o);
  const fs::path dir = out_dir(s);
  const Certificate cert = certificate_from_json(load(dir / "certificate.json"));

  std::ostringstream r;
  r << "# " << (s.name.empty() ? "scenario" : s.name) << "\n\n";
  r << "actuation: " << to_string(s.actuation) << ", dx = " << s.grid().dx() << "\n\n";
  const auto& c = cert.constants;
  r << "| constant | value |\n|---|---|\n";
  r << "| zeta | " << c.zeta << " |\n| c1 | " << c.c1 << " |\n| c2 | " << c.c2 << " |\n";
  if (s.actuation == Actuation::Neumann) r << "| c3 | " << c.c3 << " |\n| xi | " << c.xi << " |\n";
  r << "| M1 | " << c.M1 << " |\n| M2 | " << c.M2 << " |\n\n";
  r << "certificate: " << to_string(cert.status);
  if (cert.feasible()) {
    r << ", beta = " << cert.beta << ", delta = " << cert.delta << "\n\nadmissible set:";
    const auto k = cert.admissible_coefficients();
    r << " " << k[0] << " max|X0|^2 + " << k[1] << " max||u0||^2";
    if (k.size() > 2) r << " + " << k[2] << " max||u0'||^2";
    r << " <= 1";
  }
  r << "\n";
  if (!cert.diagnostic.empty()) r << "\n" << cert.diagnostic << "\n";

  if (fs::exists(dir / "summary.json")) {
    const json sm = read_json(dir / "summary.json");
    r << "\n## simulation\n\n";
    for (const auto& [key, value] : sm.items()) r << "- " << key << ": " << value.dump() << "\n";
  }
  if (fs::exists(dir / "verify.json")) {
    const json v = read_json(dir / "verify.json");
    r << "\n## verification\n\n";
    for (const auto& e : v["checks"])
      r << "- " << e["name"].get<std::string>() << ": " << e["value"].get<double>()
        << (e["pass"].get<bool>() ? " ok" : " FAIL") << "\n";
  }

  std::ofstream(dir / "report.md") << r.str();
  std::cout << r.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backstepping design, certification and simulation for delayed ODE-heat cascades"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "scenario JSON")->required();
    sub->add_option("--out", o.out, "output directory (overrides the scenario)");
    sub->add_option("--dx", o.dx, "grid spacing override");
    sub->add_option("--dt", o.dt, "time step override");
    sub->add_option("--seed", o.seed, "optimizer seed");
  };
  auto* design = app.add_subcommand("design", "build kernels and minimize beta");
  auto* simulate = app.add_subcommand("simulate", "run the closed loop from the scenario's initial data");
  auto* verify = app.add_subcommand("verify-kernels", "kernel residuals, round trips and dual checks");
  auto* report = app.add_subcommand("report", "summarize the artifacts in the output directory");
  for (auto* sub : {design, simulate, verify, report}) common(sub);
  verify->add_option("--kernels", o.kernels, "verify this kernels.json instead of rebuilding");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInternal;
  }

  try {
    if (*design) return cmd_design(o);
    if (*simulate) return cmd_simulate(o);
    if (*verify) return cmd_verify(o);
    if (*report) return cmd_report(o);
  } catch (const MissingArtifact& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMissing;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kInternal;
}
