// Microbenchmarks of the interior-point kernels: the dense reference path
// against the sparse serial path and its OpenMP variant, exercised on a
// representative stability problem (two states, one parameter, degree-(1,1)
// ansatz on a 12x12 grid — about a thousand small PSD blocks).
//
// Run all three executions of every kernel:   ./bench_kernels
// Filter, e.g. the Schur assembly only:       ./bench_kernels --benchmark_filter=schur

#include "sdp_kernels.hpp"

#include "dwell/lmi.hpp"

#include <benchmark/benchmark.h>

#include <cstdlib>
#include <random>
#include <string>
#include <utility>

namespace {

using namespace dwell;
using namespace dwell::ipm;

Matrix mat22(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

LpvDelaySystem bench_system() {
  LpvDelaySystem sys;
  sys.n = 2;
  sys.m = sys.q = sys.r = 0;
  sys.params.lower = Vector::Zero(1);
  sys.params.upper = 0.7 * Vector::Ones(1);
  sys.A = MatrixPoly(2, 2, 2, false);
  sys.A.add_term({0, 0}, mat22(0, 1, -2, -1));
  sys.A.add_term({0, 1}, mat22(0, 0, -1, 0));
  sys.Ad = MatrixPoly(2, 2, 2, false);
  sys.Ad.add_term({0, 0}, mat22(-1, 0, -1, -1));
  sys.Ad.add_term({0, 1}, mat22(0, 0, -1, 0));
  sys.B = MatrixPoly(2, 0, 2, false);
  sys.E = MatrixPoly(2, 0, 2, false);
  sys.C = MatrixPoly(0, 2, 2, false);
  sys.Cd = MatrixPoly(0, 2, 2, false);
  sys.D = MatrixPoly(0, 0, 2, false);
  sys.F = MatrixPoly(0, 0, 2, false);
  return sys;
}

struct Fixture {
  WorkProblem w;
  IterState st;  // prepared interior state; kernels overwrite it idempotently
  Vector dx;
};

Fixture& fixture() {
  static Fixture fx = [] {
    Fixture f;
    GridPlan plan;
    plan.n_tau = 12;
    plan.n_rho = 12;
    const AnalysisProblem ap = assemble_analysis(bench_system(), DelaySpec{0.5, 0.5},
                                                 DwellSpec{1e-4, 0.005}, plan, AnsatzDegrees{1, 1});
    f.w = build_work(ap.sdp);
    equilibrate(f.w);

    std::mt19937_64 rng(20240817);
    auto unit = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    auto spd = [&](int n) {
      Matrix G(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = unit();
      return (G * G.transpose() + static_cast<double>(n) * Matrix::Identity(n, n)).eval();
    };

    f.st.resize(f.w);
    for (int i = 0; i < f.w.m; ++i) f.st.x[i] = 0.3 * unit();
    for (size_t j = 0; j < f.w.blocks.size(); ++j) {
      f.st.S[j] = spd(f.w.blocks[j].dim);
      f.st.Z[j] = spd(f.w.blocks[j].dim);
    }
    if (!prepare(f.w, f.st, Exec::Serial)) std::abort();
    residuals(f.w, f.st, Exec::Serial);
    rhs_target(f.w, f.st, 0.3 * f.st.mu, nullptr, nullptr, f.st.T, f.st.g, Exec::Serial);

    f.dx = Vector(f.w.m);
    for (int i = 0; i < f.w.m; ++i) f.dx[i] = 0.05 * unit();
    directions(f.w, f.st, f.dx, f.st.T, f.st.dS, f.st.dZ, Exec::Serial);
    return f;
  }();
  return fx;
}

void bench_prepare(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    const bool ok = prepare(f.w, f.st, ex);
    benchmark::DoNotOptimize(ok);
  }
}

void bench_residuals(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    residuals(f.w, f.st, ex);
    benchmark::DoNotOptimize(f.st.mu);
  }
}

void bench_schur(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  Matrix H;
  for (auto _ : state) {
    schur(f.w, f.st, H, ex);
    benchmark::DoNotOptimize(H.data());
  }
}

void bench_rhs_target(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    rhs_target(f.w, f.st, 0.3 * f.st.mu, &f.st.dS_aff, &f.st.dZ_aff, f.st.T, f.st.g, ex);
    benchmark::DoNotOptimize(f.st.g.data());
  }
}

void bench_directions(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    directions(f.w, f.st, f.dx, f.st.T, f.st.dS, f.st.dZ, ex);
    benchmark::DoNotOptimize(f.st.dS.data());
  }
}

void bench_step_length(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    const double alpha = step_length(f.st.Slt, f.st.dS, 0.98, ex);
    benchmark::DoNotOptimize(alpha);
  }
}

void bench_worst_eig(benchmark::State& state, Exec ex) {
  Fixture& f = fixture();
  for (auto _ : state) {
    const double worst = exact_worst_eig(f.w, f.st.x, -1, ex);
    benchmark::DoNotOptimize(worst);
  }
}

}  // namespace

int main(int argc, char** argv) {
  // the corrector pair fed to rhs_target must exist before timing starts
  Fixture& f = fixture();
  f.st.dS_aff = f.st.dS;
  f.st.dZ_aff = f.st.dZ;

  const std::pair<const char*, Exec> execs[] = {{"reference", Exec::Reference},
                                                {"serial", Exec::Serial},
                                                {"parallel", Exec::Parallel}};
  using Fn = void (*)(benchmark::State&, Exec);
  const std::pair<const char*, Fn> kernels[] = {
      {"prepare", bench_prepare},       {"residuals", bench_residuals},
      {"schur", bench_schur},           {"rhs_target", bench_rhs_target},
      {"directions", bench_directions}, {"step_length", bench_step_length},
      {"worst_eig", bench_worst_eig},
  };
  for (const auto& [kname, fn] : kernels)
    for (const auto& [ename, ex] : execs) {
      const std::string name = std::string(kname) + "/" + ename;
      const Exec e = ex;
      const Fn f2 = fn;
      benchmark::RegisterBenchmark(name.c_str(),
                                   [f2, e](benchmark::State& s) { f2(s, e); });
    }

  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
