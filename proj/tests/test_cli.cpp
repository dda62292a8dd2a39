// End-to-end checks of the command-line front end: exit codes, artifacts and
// manifests for each verb, driven through the real binary (DWELL_BIN).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string the_bin() {
  const char* b = std::getenv("DWELL_BIN");
  if (!b) throw std::runtime_error("DWELL_BIN must point at the dwell binary");
  return b;
}

fs::path workspace() {
  static const fs::path ws = [] {
    fs::path p = fs::temp_directory_path() / "dwell_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return ws;
}

int run_cli(const std::string& args, const std::string& log_name) {
  const fs::path log = workspace() / log_name;
  const std::string cmd = the_bin() + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  if (st == -1) throw std::runtime_error("system() failed");
  if (!WIFEXITED(st)) return -2;
  return WEXITSTATUS(st);
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = workspace() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  REQUIRE(in.good());
  return json::parse(in);
}

std::string plant_config(const std::string& a_coeff, const std::string& extra) {
  return std::string(R"({
  "plant": {
    "n": 1, "m": 0, "q": 0, "r": 0,
    "params": {"lower": [0.0], "upper": [1.0]},
    "delay": {"h": 0.3, "mu": 0.2},
    "dwell": {"t_dwell": 0.5, "kappa": 0.05},
    "matrices": {
      "A": [{"exp": [0], "coeff": [[)") +
         a_coeff + R"(]]}],
      "Ad": [{"exp": [0], "coeff": [[0.5]]}]
    }
  },
  "grid": {"n_tau": 3, "n_rho": 3},
  "degrees": {"tau": 1, "rho": 1})" +
         extra + "\n}\n";
}

const char* kIoPlant = R"({
  "plant": {
    "n": 1, "m": 1, "q": 1, "r": 1,
    "params": {"lower": [0.0], "upper": [1.0]},
    "delay": {"h": 0.1, "mu": 0.5},
    "dwell": {"t_dwell": 0.05, "kappa": 0.01},
    "matrices": {
      "A": [{"exp": [0], "coeff": [[1.0]]}],
      "Ad": [{"exp": [0], "coeff": [[0.2]]}],
      "B": [{"exp": [0], "coeff": [[1.0]]}],
      "E": [{"exp": [0], "coeff": [[1.0]]}],
      "C": [{"exp": [0], "coeff": [[1.0]]}],
      "D": [{"exp": [0], "coeff": [[0.1]]}]
    }
  },
  "grid": {"n_tau": 3, "n_rho": 3},
  "degrees": {"tau": 1, "rho": 1}
})";

}  // namespace

TEST_CASE("usage problems exit with the configuration code") {
  CHECK(run_cli("", "usage_none.log") == 2);
  CHECK(run_cli("frobnicate", "usage_verb.log") == 2);
  CHECK(run_cli("analyze", "usage_noconfig.log") == 2);
  CHECK(run_cli("analyze --config /nonexistent/cfg.json", "usage_missing.log") == 2);
  CHECK(run_cli("--help", "usage_help.log") == 0);

  const fs::path broken = write_config("broken.json", "{ this is not json");
  CHECK(run_cli("analyze -c " + broken.string(), "usage_broken.log") == 2);

  // simulate: a gain path that does not exist fails option validation
  const fs::path cfg = write_config("sim_missing_gain.json", plant_config("-2.0", ""));
  CHECK(run_cli("simulate -c " + cfg.string() + " -g /nonexistent/gains.json",
                "usage_badgain.log") == 2);
}

TEST_CASE("analyze writes a certificate for a stable plant and flags an unstable one") {
  const fs::path good = write_config("analyze_good.json", plant_config("-2.0", ""));
  const fs::path out_good = workspace() / "out_analyze_good";
  CHECK(run_cli("analyze -c " + good.string() + " -o " + out_good.string() + " --dump-sdp",
                "analyze_good.log") == 0);
  CHECK(fs::exists(out_good / "certificate.json"));
  CHECK(fs::exists(out_good / "problem.sdp"));
  const json man = read_manifest(out_good);
  CHECK(man.at("task") == "analyze");
  CHECK(man.at("report").at("status") == "certified");
  CHECK(man.at("report").at("refined_ok") == true);
  CHECK(man.at("outputs").at("certificate") == "certificate.json");

  const fs::path bad = write_config("analyze_bad.json", plant_config("1.0", ""));
  const fs::path out_bad = workspace() / "out_analyze_bad";
  CHECK(run_cli("analyze -c " + bad.string() + " -o " + out_bad.string(),
                "analyze_bad.log") == 1);
  CHECK_FALSE(fs::exists(out_bad / "certificate.json"));
  CHECK(read_manifest(out_bad).at("report").at("status") == "not-certified");
}

TEST_CASE("simulate produces a trajectory and rejects a gainless closed loop") {
  const std::string sim_extra = R"(,
  "sim": {"dt": 0.01, "horizon": 1.0, "x0": [1.0], "rho": {"mode": "exact", "seed": 3}})";
  const fs::path cfg = write_config("simulate.json", plant_config("-2.0", sim_extra));
  const fs::path out = workspace() / "out_simulate";
  CHECK(run_cli("simulate -c " + cfg.string() + " -o " + out.string(), "simulate.log") == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  const json man = read_manifest(out);
  CHECK(man.at("report").at("closed_loop") == false);
  CHECK(man.at("report").at("diverged") == false);
  CHECK(man.at("report").at("samples").get<int>() > 100);

  const std::string closed_extra = R"(,
  "sim": {"dt": 0.01, "horizon": 1.0, "x0": [1.0], "closed_loop": true})";
  const fs::path closed = write_config("simulate_closed.json", plant_config("-2.0", closed_extra));
  CHECK(run_cli("simulate -c " + closed.string() + " -o " +
                    (workspace() / "out_simulate_closed").string(),
                "simulate_closed.log") == 2);
}

TEST_CASE("synthesize then simulate the closed loop through gain files") {
  const fs::path cfg = write_config("synth.json", kIoPlant);
  const fs::path out = workspace() / "out_synth";
  CHECK(run_cli("synthesize -c " + cfg.string() + " -o " + out.string(), "synth.log") == 0);
  CHECK(fs::exists(out / "gains.json"));
  CHECK(fs::exists(out / "certificate.json"));  // closed-loop audit artifact
  const json man = read_manifest(out);
  CHECK(man.at("report").at("status") == "feasible");
  CHECK(man.at("report").at("gamma").get<double>() > 0.0);
  CHECK(man.at("report").at("closed_loop").at("status") == "certified");

  const std::string sim_extra = R"(
  "sim": {"dt": 0.002, "horizon": 1.0, "x0": [0.0],
          "disturbance": {"type": "step", "value": [1.0]},
          "rho": {"mode": "exact", "seed": 2}},
)";
  std::string closed_cfg(kIoPlant);
  closed_cfg.insert(closed_cfg.find("\"plant\""), sim_extra);
  const fs::path sim_cfg = write_config("synth_sim.json", closed_cfg);
  const fs::path sim_out = workspace() / "out_synth_sim";
  CHECK(run_cli("simulate -c " + sim_cfg.string() + " -g " + (out / "gains.json").string() +
                    " -o " + sim_out.string(),
                "synth_sim.log") == 0);
  const json sman = read_manifest(sim_out);
  CHECK(sman.at("report").at("closed_loop") == true);
  CHECK(sman.at("report").contains("empirical_l2_gain"));
  CHECK(sman.at("report").at("empirical_l2_gain").get<double>() <
        man.at("report").at("gamma").get<double>());
}

TEST_CASE("sweep requires its section and certify audits a certificate") {
  const fs::path nosweep = write_config("sweep_missing.json", plant_config("-2.0", ""));
  CHECK(run_cli("sweep -c " + nosweep.string() + " -o " +
                    (workspace() / "out_sweep_missing").string(),
                "sweep_missing.log") == 2);

  const std::string sweep_extra = R"(,
  "sweep": {"target": "param_upper", "lo": 0.5, "hi": 4.0, "value_tol": 0.1})";
  const fs::path sweep_cfg =
      write_config("sweep.json", plant_config("-2.0", sweep_extra));
  const fs::path sweep_out = workspace() / "out_sweep";
  CHECK(run_cli("sweep -c " + sweep_cfg.string() + " -o " + sweep_out.string(),
                "sweep.log") == 0);
  CHECK(fs::exists(sweep_out / "sweep.csv"));
  CHECK(fs::exists(sweep_out / "certificate.json"));
  const json sman = read_manifest(sweep_out);
  CHECK(sman.at("report").at("never_certified") == false);
  CHECK(sman.at("report").at("certified_value").get<double>() > 0.5);

  // audit a fresh analyze certificate on the plant it came from: passes
  const std::string audit_extra = R"(,
  "sim": {"dt": 0.005, "horizon": 2.0},
  "certify": {"trajectories": 3, "seed": 5})";
  const fs::path audit_cfg = write_config("certify.json", plant_config("-2.0", audit_extra));
  const fs::path analyze_out = workspace() / "out_certify_source";
  const fs::path audit_out = workspace() / "out_certify";
  REQUIRE(run_cli("analyze -c " + audit_cfg.string() + " -o " + analyze_out.string(),
                  "certify_source.log") == 0);
  REQUIRE(fs::exists(analyze_out / "certificate.json"));
  CHECK(run_cli("certify -c " + audit_cfg.string() + " --certificate " +
                    (analyze_out / "certificate.json").string() + " -o " + audit_out.string(),
                "certify.log") == 0);
  CHECK(fs::exists(audit_out / "vtrace_worst.csv"));
  CHECK(read_manifest(audit_out).at("report").at("ok") == true);

  // the same functional is not monotone along an unstable plant's runs
  const fs::path lie_cfg = write_config("certify_bad.json", plant_config("1.0", audit_extra));
  CHECK(run_cli("certify -c " + lie_cfg.string() + " --certificate " +
                    (analyze_out / "certificate.json").string() + " -o " +
                    (workspace() / "out_certify_bad").string(),
                "certify_bad.log") == 1);
}
