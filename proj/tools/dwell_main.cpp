// Command-line front end: analyze / synthesize / simulate / sweep / certify,
// each driven by one self-contained JSON configuration. Every run writes a
// manifest plus its artifacts into the output directory; reports are
// deterministic for a fixed config and seed.
//
// Exit codes: 0 certified/feasible (or simulation complete), 1 not certified /
// infeasible / audit failed, 2 configuration error, 3 solver or runtime failure.

#include "dwell/analysis.hpp"
#include "dwell/consensus.hpp"
#include "dwell/model.hpp"
#include "dwell/sim.hpp"
#include "dwell/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dwell;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kConfigError = 2;
constexpr int kFailure = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  return json::parse(in);
}

Matrix mat_from_json(const json& a) {
  if (!a.is_array() || a.empty() || !a[0].is_array())
    throw ConfigError("expected a matrix as an array of rows");
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(a[0].size());
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(a[i].size()) != cols) throw ConfigError("ragged matrix rows");
    for (int j = 0; j < cols; ++j) M(i, j) = a[i][j].get<double>();
  }
  return M;
}

Vector vec_from_json(const json& a) {
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest");
  out << manifest.dump(2) << "\n";
}

// --- configuration -> library structures ------------------------------------

struct Context {
  LpvDelaySystem sys;
  DelaySpec delay;
  DwellSpec dwell;
  std::optional<ConsensusNetwork> net;  // present for consensus configs
  bool network_flavor = false;          // sys is the stacked network plant
};

Context load_context(const json& cfg) {
  Context ctx;
  if (cfg.contains("plant")) {
    PlantFile pf = parse_plant(cfg.at("plant").dump());
    ctx.sys = pf.sys;
    ctx.delay = pf.delay;
    ctx.dwell = pf.dwell;
  } else if (cfg.contains("consensus")) {
    const json& c = cfg.at("consensus");
    ConsensusNetwork net;
    net.A = mat_from_json(c.at("A"));
    net.Ad = mat_from_json(c.at("Ad"));
    net.B = mat_from_json(c.at("B"));
    net.E = mat_from_json(c.at("E"));
    net.C = mat_from_json(c.at("C"));
    net.Cd = mat_from_json(c.at("Cd"));
    const int r = static_cast<int>(net.C.rows());
    net.D = c.contains("D") ? mat_from_json(c.at("D"))
                            : Matrix::Zero(r, net.B.cols());
    net.F = c.contains("F") ? mat_from_json(c.at("F"))
                            : Matrix::Zero(r, net.E.cols());
    net.L1 = mat_from_json(c.at("L1"));
    net.L2 = mat_from_json(c.at("L2"));
    ctx.delay.h = c.at("delay").at("h").get<double>();
    ctx.delay.mu = c.at("delay").at("mu").get<double>();
    ctx.dwell.t_dwell = c.at("dwell").at("t_dwell").get<double>();
    ctx.dwell.kappa = c.at("dwell").at("kappa").get<double>();

    const ConsensusBuild build = build_consensus(net);
    const std::string use = c.value("use", "scalarized");
    if (use == "scalarized") {
      ctx.sys = build.scalarized;
    } else if (use == "network") {
      ctx.sys = build.network;
      ctx.network_flavor = true;
    } else {
      throw ConfigError("consensus.use must be \"scalarized\" or \"network\"");
    }
    ctx.net = std::move(net);
  } else {
    throw ConfigError("config needs a \"plant\" or a \"consensus\" section");
  }
  ctx.sys.validate();
  ctx.delay.validate();
  ctx.dwell.validate();
  return ctx;
}

SolverOptions solver_options(const json& cfg) {
  SolverOptions s;
  if (cfg.contains("solver")) {
    const json& j = cfg.at("solver");
    s.tol = j.value("tol", s.tol);
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.parallel = j.value("parallel", s.parallel);
    s.verbosity = j.value("verbosity", s.verbosity);
  }
  return s;
}

void fill_common(const json& cfg, GridPlan& grid, AnsatzDegrees& degrees, double& margin) {
  if (cfg.contains("grid")) {
    grid.n_tau = cfg.at("grid").value("n_tau", grid.n_tau);
    grid.n_rho = cfg.at("grid").value("n_rho", grid.n_rho);
  }
  if (cfg.contains("degrees")) {
    degrees.deg_tau = cfg.at("degrees").value("tau", degrees.deg_tau);
    degrees.deg_rho = cfg.at("degrees").value("rho", degrees.deg_rho);
  }
  margin = cfg.value("margin", margin);
}

AnalysisOptions analysis_options(const json& cfg) {
  AnalysisOptions o;
  fill_common(cfg, o.grid, o.degrees, o.margin);
  o.solver = solver_options(cfg);
  o.refine_check = cfg.value("refine_check", o.refine_check);
  o.refine_tol = cfg.value("refine_tol", o.refine_tol);
  return o;
}

SynthesisOptions synthesis_options(const json& cfg) {
  SynthesisOptions o;
  fill_common(cfg, o.grid, o.degrees, o.margin);
  o.solver = solver_options(cfg);
  o.refine_check = cfg.value("refine_check", o.refine_check);
  o.refine_tol = cfg.value("refine_tol", o.refine_tol);
  const json s = cfg.value("synthesis", json::object());
  const std::string mode = s.value("mode", "minimize");
  if (mode == "fixed") {
    o.mode = GammaMode::Fixed;
    if (!s.contains("gamma")) throw ConfigError("fixed-gamma synthesis needs synthesis.gamma");
    o.gamma_fixed = s.at("gamma").get<double>();
  } else if (mode != "minimize") {
    throw ConfigError("synthesis.mode must be \"minimize\" or \"fixed\"");
  }
  const std::string structure = s.value("structure", "free");
  if (structure == "tau_rho_split")
    o.structure = UStructure::TauRhoSplit;
  else if (structure != "free")
    throw ConfigError("synthesis.structure must be \"free\" or \"tau_rho_split\"");
  o.backoff = s.value("backoff", o.backoff);
  return o;
}

// --- simulation plumbing ------------------------------------------------------

std::function<double(double)> delay_profile(const json& sim, const DelaySpec& delay) {
  if (!sim.contains("delay_profile")) return {};
  const json& p = sim.at("delay_profile");
  const std::string type = p.at("type").get<std::string>();
  if (type == "constant") {
    const double v = p.value("value", delay.h);
    return [v](double) { return v; };
  }
  if (type == "sinusoid") {
    const double base = p.at("base").get<double>();
    const double amp = p.at("amp").get<double>();
    const double freq = p.at("freq").get<double>();
    return [base, amp, freq](double t) { return base + amp * std::sin(freq * t); };
  }
  throw ConfigError("delay_profile.type must be \"constant\" or \"sinusoid\"");
}

std::function<Vector(double)> disturbance_profile(const json& sim, int m) {
  if (!sim.contains("disturbance")) return {};
  const json& p = sim.at("disturbance");
  const std::string type = p.at("type").get<std::string>();
  if (type == "none") return {};
  Vector v = vec_from_json(p.at("value"));
  if (static_cast<int>(v.size()) != m)
    throw ConfigError("disturbance value length does not match the plant's w channel");
  if (type == "step") {
    const double start = p.value("start", 0.0);
    return [v, start, m](double t) { return t >= start ? v : Vector::Zero(m).eval(); };
  }
  if (type == "sinusoid") {
    const double freq = p.at("freq").get<double>();
    return [v, freq](double t) { return (std::sin(freq * t) * v).eval(); };
  }
  throw ConfigError("disturbance.type must be \"none\", \"step\" or \"sinusoid\"");
}

SimConfig sim_config(const json& sim, const Context& ctx) {
  SimConfig c;
  c.dt = sim.value("dt", c.dt);
  c.horizon = sim.value("horizon", c.horizon);
  c.x0 = sim.contains("x0") ? vec_from_json(sim.at("x0")) : Vector::Zero(ctx.sys.n).eval();
  if (sim.contains("history_samples"))
    for (const json& row : sim.at("history_samples")) c.history_samples.push_back(vec_from_json(row));
  c.delay_fn = delay_profile(sim, ctx.delay);
  c.disturbance_fn = disturbance_profile(sim, ctx.sys.m);
  c.seed = sim.value("seed", c.seed);
  return c;
}

PwcTrajectory rho_trajectory(const json& sim, const Context& ctx, double horizon) {
  const json r = sim.value("rho", json::object());
  if (r.contains("switch_times")) {
    PwcTrajectory traj;
    for (const json& t : r.at("switch_times")) traj.switch_times.push_back(t.get<double>());
    for (const json& v : r.at("values")) traj.values.push_back(vec_from_json(v));
    traj.validate(&ctx.dwell, &ctx.sys.params);
    return traj;
  }
  const std::uint64_t seed = r.value("seed", sim.value("seed", std::uint64_t{1}));
  const double spacing = r.value("spacing", 0.0);
  if (spacing > 0.0) {
    if (spacing < ctx.dwell.t_dwell)
      throw ConfigError("rho.spacing must be at least the dwell time");
    // fixed spacing, random values: hold exactly `spacing` between draws
    return gen_pwc_trajectory(seed, DwellSpec{spacing, ctx.dwell.kappa}, ctx.sys.params,
                              horizon, HoldMode::Exact);
  }
  const std::string mode = r.value("mode", "random");
  if (mode == "exact")
    return gen_pwc_trajectory(seed, ctx.dwell, ctx.sys.params, horizon, HoldMode::Exact);
  if (mode == "random")
    return gen_pwc_trajectory(seed, ctx.dwell, ctx.sys.params, horizon, HoldMode::Random);
  throw ConfigError("rho.mode must be \"exact\" or \"random\"");
}

std::optional<GainSchedule> acquire_gain(const std::string& cli_path, const json& block,
                                         const Context& ctx) {
  const std::string path = !cli_path.empty() ? cli_path : block.value("gain", std::string());
  if (path.empty()) return std::nullopt;
  GainSchedule gs = load_gains(path);
  if (block.value("lift_gain", false)) {
    if (!ctx.net) throw ConfigError("lift_gain requires a consensus config");
    gs = lift_gain(gs, *ctx.net);
  }
  return gs;
}

json refinement_report(const Certificate& cert) {
  return json{{"refined_checked", cert.refined_checked},
              {"refined_ok", cert.refined_ok},
              {"worst_grid_eig", cert.worst_grid_eig},
              {"worst_refined_eig", cert.worst_refined_eig},
              {"worst_refined_tag", cert.worst_refined_tag}};
}

// --- verbs ----------------------------------------------------------------------

int run_analyze(const json& cfg, const fs::path& out, bool dump_sdp) {
  const Context ctx = load_context(cfg);
  const AnalysisOptions opts = analysis_options(cfg);
  if (dump_sdp) {
    const AnalysisProblem ap =
        assemble_analysis(ctx.sys, ctx.delay, ctx.dwell, opts.grid, opts.degrees, opts.margin);
    save_problem(ap.sdp, (out / "problem.sdp").string());
  }

  const AnalysisResult res = check_stability(ctx.sys, ctx.delay, ctx.dwell, opts);

  json report{{"status", to_string(res.status)},
              {"message", res.message},
              {"iterations", res.stats.iterations}};
  json outputs = json::object();
  if (res.certificate) {
    save_certificate(*res.certificate, (out / "certificate.json").string());
    outputs["certificate"] = "certificate.json";
    report.update(refinement_report(*res.certificate));
  }
  write_manifest(out, json{{"task", "analyze"}, {"report", report}, {"outputs", outputs},
                           {"config", cfg}});
  std::cout << "analyze: " << to_string(res.status) << " — " << res.message << "\n";

  if (res.status == AnalysisStatus::SolverFailure) return kFailure;
  if (res.status != AnalysisStatus::Certified) return kNegative;
  return (res.certificate && res.certificate->refined_checked && !res.certificate->refined_ok)
             ? kNegative
             : kOk;
}

int run_synthesize(const json& cfg, const fs::path& out, bool dump_sdp) {
  const Context ctx = load_context(cfg);
  const SynthesisOptions opts = synthesis_options(cfg);
  if (dump_sdp) {
    const SynthesisProblem sp =
        assemble_synthesis(ctx.sys, ctx.delay, ctx.dwell, opts.grid, opts.degrees, opts.mode,
                           opts.mode == GammaMode::Fixed ? opts.gamma_fixed : 0.0,
                           opts.structure, opts.margin);
    save_problem(sp.sdp, (out / "problem.sdp").string());
  }

  const SynthesisResult res = synthesize(ctx.sys, ctx.delay, ctx.dwell, opts);

  json report{{"status", to_string(res.status)},
              {"message", res.message},
              {"gamma", res.gamma},
              {"gamma_optimal", res.gamma_optimal},
              {"iterations", res.stats.iterations}};
  json outputs = json::object();
  int code = kOk;
  if (res.status == SynthesisStatus::Infeasible) code = kNegative;
  if (res.status == SynthesisStatus::SolverFailure) code = kFailure;

  if (res.gains) {
    save_gains(*res.gains, (out / "gains.json").string());
    outputs["gains"] = "gains.json";
  }
  if (res.tilde_certificate) {
    report["design"] = refinement_report(*res.tilde_certificate);
    if (res.tilde_certificate->refined_checked && !res.tilde_certificate->refined_ok)
      code = std::max(code, kNegative);
  }

  if (res.status == SynthesisStatus::Feasible &&
      cfg.value("synthesis", json::object()).value("certify_closed_loop", true)) {
    const AnalysisResult cl =
        certify_closed_loop(ctx.sys, *res.gains, ctx.delay, ctx.dwell, analysis_options(cfg));
    json clr{{"status", to_string(cl.status)}, {"message", cl.message}};
    if (cl.certificate) {
      save_certificate(*cl.certificate, (out / "certificate.json").string());
      outputs["certificate"] = "certificate.json";
      clr.update(refinement_report(*cl.certificate));
    }
    report["closed_loop"] = clr;
    if (cl.status == AnalysisStatus::SolverFailure)
      code = std::max(code, kFailure);
    else if (cl.status != AnalysisStatus::Certified ||
             (cl.certificate && cl.certificate->refined_checked && !cl.certificate->refined_ok))
      code = std::max(code, kNegative);
  }

  write_manifest(out, json{{"task", "synthesize"}, {"report", report}, {"outputs", outputs},
                           {"config", cfg}});
  std::cout << "synthesize: " << to_string(res.status) << " — " << res.message << "\n";
  return code;
}

int run_simulate(const json& cfg, const fs::path& out, const std::string& gain_path) {
  const Context ctx = load_context(cfg);
  const json sim = cfg.value("sim", json::object());
  const SimConfig sc = sim_config(sim, ctx);
  const std::optional<GainSchedule> gain = acquire_gain(gain_path, sim, ctx);
  const bool closed = sim.value("closed_loop", gain.has_value());
  if (closed && !gain)
    throw ConfigError("closed-loop simulation requested but no gain file was given");

  const PwcTrajectory rho = rho_trajectory(sim, ctx, sc.horizon);
  const Trajectory tr =
      simulate(ctx.sys, closed ? &*gain : nullptr, rho, ctx.delay, ctx.dwell, sc);
  save_csv(tr, (out / "trajectory.csv").string());

  json report{{"closed_loop", closed},
              {"samples", tr.times.size()},
              {"diverged", tr.diverged},
              {"final_time", tr.times.back()},
              {"final_state_norm", tr.states.back().norm()},
              {"final_output_norm", tr.outputs.back().norm()},
              {"switches", rho.switch_times.size()}};
  if (tr.diverged) report["blowup_time"] = tr.blowup_time;
  try {
    report["empirical_l2_gain"] = empirical_l2_gain(tr);
  } catch (const std::domain_error&) {
    // undefined without a zero initial state and nonzero disturbance energy
  }
  json outputs{{"trajectory", "trajectory.csv"}};

  if (ctx.network_flavor) {
    const int N = ctx.net->agents();
    const std::vector<double> dis = disagreement(tr, N);
    std::ofstream dout(out / "disagreement.csv");
    dout << std::setprecision(14) << "t,disagreement\n";
    for (size_t i = 0; i < dis.size(); ++i)
      dout << tr.times[i] << "," << dis[i] << "\n";
    outputs["disagreement"] = "disagreement.csv";
    const double d0 = dis[static_cast<size_t>(tr.zero_index)];
    const double dT = dis.back();
    report["disagreement"] = json{{"initial", d0},
                                  {"final", dT},
                                  {"reduction", dT > 0.0 ? d0 / dT : std::numeric_limits<double>::infinity()}};
  }

  write_manifest(out, json{{"task", "simulate"}, {"report", report}, {"outputs", outputs},
                           {"config", cfg}});
  std::cout << "simulate: " << tr.times.size() << " samples to t = " << tr.times.back()
            << (tr.diverged ? " (diverged)" : "") << "\n";
  return kOk;
}

int run_sweep(const json& cfg, const fs::path& out) {
  const Context ctx = load_context(cfg);
  if (!cfg.contains("sweep")) throw ConfigError("sweep needs a \"sweep\" section");
  const json& sw = cfg.at("sweep");
  const std::string target = sw.at("target").get<std::string>();
  const double lo = sw.at("lo").get<double>();
  const double hi = sw.at("hi").get<double>();
  const double value_tol = sw.value("value_tol", 1e-2);
  const AnalysisOptions opts = analysis_options(cfg);

  SweepResult res;
  if (target == "param_upper") {
    if (ctx.sys.params.dim() != 1)
      throw ConfigError("a param_upper sweep needs a one-parameter plant");
    const LpvDelaySystem base = ctx.sys;
    const auto family = [&base](double v) {
      LpvDelaySystem s = base;
      s.params.upper[0] = v;
      return s;
    };
    res = max_param_bound(family, ctx.delay, ctx.dwell, lo, hi, value_tol, opts);
  } else if (target == "dwell") {
    res = min_dwell_time(ctx.sys, ctx.delay, ctx.dwell.kappa, lo, hi, value_tol, opts);
  } else {
    throw ConfigError("sweep.target must be \"param_upper\" or \"dwell\"");
  }

  {
    std::ofstream csv(out / "sweep.csv");
    csv << std::setprecision(14) << "value,status,iterations\n";
    for (const SweepProbe& p : res.probes)
      csv << p.value << "," << to_string(p.status) << "," << p.iterations << "\n";
  }
  json report{{"target", target},
              {"never_certified", res.never_certified},
              {"probes", res.probes.size()},
              {"message", res.message}};
  json outputs{{"table", "sweep.csv"}};
  if (!res.never_certified) {
    report["certified_value"] = res.certified_value;
    if (res.best.certificate) {
      save_certificate(*res.best.certificate, (out / "certificate.json").string());
      outputs["certificate"] = "certificate.json";
      report["best"] = refinement_report(*res.best.certificate);
    }
  }
  write_manifest(out, json{{"task", "sweep"}, {"report", report}, {"outputs", outputs},
                           {"config", cfg}});
  std::cout << "sweep: " << res.message << "\n";

  if (res.never_certified) return kNegative;
  if (res.best.status == AnalysisStatus::SolverFailure) return kFailure;
  if (res.best.certificate && res.best.certificate->refined_checked &&
      !res.best.certificate->refined_ok)
    return kNegative;
  return kOk;
}

int run_certify(const json& cfg, const fs::path& out, const std::string& gain_path,
                const std::string& cert_path) {
  const Context ctx = load_context(cfg);
  const json ct = cfg.value("certify", json::object());
  const std::string path = !cert_path.empty() ? cert_path : ct.value("certificate", std::string());
  if (path.empty()) throw ConfigError("certify needs a certificate file (--certificate)");
  const Certificate cert = load_certificate(path);
  if (cert.P.rows() != ctx.sys.n)
    throw ConfigError("certificate dimension does not match the configured plant");
  if (std::abs(cert.delay.h - ctx.delay.h) > 1e-12 ||
      std::abs(cert.dwell.t_dwell - ctx.dwell.t_dwell) > 1e-12)
    throw ConfigError("certificate delay/dwell context does not match the config");

  const std::optional<GainSchedule> gain = acquire_gain(gain_path, ct, ctx);
  const json simj = ct.contains("sim") ? ct.at("sim") : cfg.value("sim", json::object());
  SimConfig base_sc = sim_config(simj, ctx);
  base_sc.disturbance_fn = {};  // the monotonicity audit applies to the unforced loop

  const int ntraj = ct.value("trajectories", 10);
  const double rel_tol = ct.value("rel_tol", 1e-4);
  const std::uint64_t seed = ct.value("seed", std::uint64_t{7});
  const bool fixed_x0 = simj.contains("x0");

  json runs = json::array();
  bool all_ok = true;
  double worst_over_runs = 0.0;
  LyapunovTrace worst_trace;
  std::mt19937_64 x0_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto u01 = [&]() { return static_cast<double>(x0_rng() >> 11) * 0x1.0p-53; };

  for (int k = 0; k < ntraj; ++k) {
    SimConfig sc = base_sc;
    if (!fixed_x0) {
      sc.x0 = Vector(ctx.sys.n);
      for (int i = 0; i < ctx.sys.n; ++i) sc.x0[i] = 2.0 * u01() - 1.0;
    }
    const PwcTrajectory rho = gen_pwc_trajectory(seed + static_cast<std::uint64_t>(k),
                                                 ctx.dwell, ctx.sys.params, sc.horizon,
                                                 HoldMode::Random);
    const Trajectory tr =
        simulate(ctx.sys, gain ? &*gain : nullptr, rho, ctx.delay, ctx.dwell, sc);
    json entry{{"seed", seed + static_cast<std::uint64_t>(k)},
               {"switches", rho.switch_times.size()},
               {"diverged", tr.diverged}};
    if (tr.diverged) {
      all_ok = false;
      entry["ok"] = false;
    } else {
      const LyapunovTrace trace = lyapunov_trace(tr, cert, cert.delay, cert.dwell);
      const NonincreaseReport rep = check_nonincrease(trace, rel_tol);
      entry["ok"] = rep.ok;
      entry["violations"] = rep.violations;
      entry["worst_increase"] = rep.worst_increase;
      entry["v_start"] = trace.values.front();
      entry["v_end"] = trace.values.back();
      if (!rep.ok) {
        all_ok = false;
        entry["worst_time"] = rep.worst_time;
      }
      if (rep.worst_increase >= worst_over_runs) {
        worst_over_runs = rep.worst_increase;
        worst_trace = trace;
      }
    }
    runs.push_back(std::move(entry));
  }

  {
    std::ofstream vout(out / "vtrace_worst.csv");
    vout << std::setprecision(14) << "t,V\n";
    for (size_t i = 0; i < worst_trace.times.size(); ++i)
      vout << worst_trace.times[i] << "," << worst_trace.values[i] << "\n";
  }
  json report{{"ok", all_ok},
              {"trajectories", ntraj},
              {"rel_tol", rel_tol},
              {"closed_loop", gain.has_value()},
              {"runs", runs}};
  write_manifest(out, json{{"task", "certify"}, {"report", report},
                           {"outputs", json{{"worst_trace", "vtrace_worst.csv"}}},
                           {"config", cfg}});
  std::cout << "certify: " << (all_ok ? "non-increasing on all " : "violations on some of ")
            << ntraj << " trajectories\n";
  return all_ok ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dwell — stability certificates, gain synthesis and simulation for "
               "switched LPV time-delay systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir, gain_path, cert_path;
  bool dump_sdp = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory (default runs/<verb>)");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "certify stability of the plant");
  add_common(analyze);
  analyze->add_flag("--dump-sdp", dump_sdp, "write the assembled SDP next to the results");

  CLI::App* synth =
      app.add_subcommand("synthesize", "design a gain schedule with an L2 guarantee");
  add_common(synth);
  synth->add_flag("--dump-sdp", dump_sdp, "write the assembled SDP next to the results");

  CLI::App* sim = app.add_subcommand("simulate", "integrate the configured system");
  add_common(sim);
  sim->add_option("-g,--gain", gain_path, "gain file for closed-loop runs")
      ->check(CLI::ExistingFile);

  CLI::App* sweep = app.add_subcommand("sweep", "bisect a scalar design parameter");
  add_common(sweep);

  CLI::App* certify =
      app.add_subcommand("certify", "audit a certificate along random simulated runs");
  add_common(certify);
  certify->add_option("--certificate", cert_path, "certificate file to audit")
      ->check(CLI::ExistingFile);
  certify->add_option("-g,--gain", gain_path, "gain file for closed-loop runs")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help lands here too (exit 0); anything else is a usage problem
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    const json cfg = read_json(config_path);
    const fs::path out = out_dir.empty() ? fs::path("runs") / verb : fs::path(out_dir);
    fs::create_directories(out);

    if (verb == "analyze") return run_analyze(cfg, out, dump_sdp);
    if (verb == "synthesize") return run_synthesize(cfg, out, dump_sdp);
    if (verb == "simulate") return run_simulate(cfg, out, gain_path);
    if (verb == "sweep") return run_sweep(cfg, out);
    if (verb == "certify") return run_certify(cfg, out, gain_path, cert_path);
    std::cerr << "unknown verb\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
