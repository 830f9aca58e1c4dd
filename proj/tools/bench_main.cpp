// rwre-bench: throughput of the lean OpenMP velocity kernel against the
// serial record-building reference, on the two-vertex benchmark model. The
// two paths must produce bit-identical estimates (same streams, same
// reduction order); the benchmark fails loudly if they ever diverge.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rwre/env.hpp"
#include "rwre/mc.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timing {
  rwre::mc::VelocityEstimate est;
  double secs = 0;
};

template <class F>
Timing timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  Timing t;
  t.est = f();
  t.secs = seconds_since(t0);
  return t;
}

void print_row(const char* name, const Timing& t, double total_steps) {
  std::printf("%-22s %10.3fs  %12.3g steps/s  mean=%.17g se=%.3g\n", name, t.secs,
              total_steps / t.secs, t.est.mean, t.est.se);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"velocity-kernel benchmark: serial reference vs OpenMP"};
  std::int64_t T = 10000, n = 2000;
  std::uint64_t seed = 20260814;
  app.add_option("--T", T, "steps per walk");
  app.add_option("--n", n, "replicates");
  app.add_option("--seed", seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  rwre::env::ModelSpec spec = rwre::env::kalikow_default_spec();
  const double e1[2] = {1.0, 0.0};
  const double total_steps = static_cast<double>(T) * static_cast<double>(n);

  Timing ref = timed(
      [&] { return rwre::ref::empirical_velocity(spec, e1, T, n, seed); });
  print_row("serial reference", ref, total_steps);

#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  Timing lean1 = timed(
      [&] { return rwre::mc::empirical_velocity(spec, e1, T, n, seed); });
  print_row("lean kernel, 1 thread", lean1, total_steps);

#ifdef _OPENMP
  int max_threads = omp_get_num_procs();
  if (const char* v = std::getenv("RWRE_THREADS")) {
    int cap = std::atoi(v);
    if (cap > 0) max_threads = cap;
  }
  omp_set_num_threads(max_threads);
  Timing leanN = timed(
      [&] { return rwre::mc::empirical_velocity(spec, e1, T, n, seed); });
  std::string label = "lean kernel, " + std::to_string(max_threads) + " threads";
  print_row(label.c_str(), leanN, total_steps);
#else
  Timing leanN = lean1;
  std::puts("(built without OpenMP: no parallel run)");
#endif

  bool identical = ref.est.mean == lean1.est.mean && ref.est.se == lean1.est.se &&
                   lean1.est.mean == leanN.est.mean && lean1.est.se == leanN.est.se;
  if (!identical) {
    std::puts("MISMATCH: kernel estimates are not bit-identical");
    return 1;
  }
  std::printf("estimates bit-identical across paths; lean speedup %.2fx serial, "
              "parallel %.2fx lean\n",
              ref.secs / lean1.secs, lean1.secs / leanN.secs);
  return 0;
}
