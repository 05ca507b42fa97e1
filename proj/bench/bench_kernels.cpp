// Serial reference vs OpenMP kernels: mode substitution and shot sampling.
//
//   bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ghzsim/analyzer.hpp"
#include "ghzsim/protocol.hpp"
#include "ghzsim/source.hpp"

using namespace ghzsim;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, bool same) {
  std::printf("%-40s %10.4f %10.4f %8.2fx  %s\n", name.c_str(), serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, best of %d\n", omp_get_max_threads(), repeats);
  std::printf("%-40s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  for (auto [n, j] : {std::pair{3, 3}, std::pair{4, 2}, std::pair{5, 1}}) {
    Ket s = system_state(n, {0.1, j});
    auto u = ghz_analyzer_unitary(n);
    Ket a, b;
    const double ts = best_of(repeats, [&] { a = apply_mode_unitary_serial(s, u); });
    const double tp = best_of(repeats, [&] { b = apply_mode_unitary(s, u); });
    row("substitution n=" + std::to_string(n) + " jmax=" + std::to_string(j) + " (" + std::to_string(s.size()) +
            " terms)",
        ts, tp, a.terms() == b.terms());
  }

  ProtocolConfig c;
  c.n = 3;
  c.source = {0.2, 2};
  c.detector = {false, 0.8, 0.01};
  c.engine = Engine::MonteCarlo;
  c.trials = 2'000'000;
  c.seed = 7;
  ProtocolConfig ideal = c;
  ideal.detector = DetectorModel{true, 1.0, 0.0};
  auto branches = protocol_branches(ideal, system_state(c.n, c.source));
  std::map<ClickPattern, std::uint64_t> x, y;
  const double ts = best_of(repeats, [&] { x = sample_patterns_serial(c, branches); });
  const double tp = best_of(repeats, [&] { y = sample_patterns(c, branches); });
  row("sampling n=3, 2e6 shots", ts, tp, x == y);
  return 0;
}
