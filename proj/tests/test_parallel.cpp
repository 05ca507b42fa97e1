#include <doctest.h>

#include <omp.h>

#include "ghzsim/analyzer.hpp"
#include "ghzsim/protocol.hpp"
#include "ghzsim/source.hpp"

using namespace ghzsim;

TEST_CASE("parallel substitution kernel is bit-identical to the serial reference") {
  for (int n : {2, 3, 4}) {
    Ket s = system_state(n, {0.1, 2});
    auto u = ghz_analyzer_unitary(n);
    Ket serial = apply_mode_unitary_serial(s, u);
    for (int threads : {1, 2, 4}) {
      omp_set_num_threads(threads);
      CHECK(apply_mode_unitary(s, u).terms() == serial.terms());
    }
  }
}

TEST_CASE("parallel shot sampler reproduces the serial counts for any thread count") {
  ProtocolConfig c;
  c.n = 3;
  c.source = {0.2, 2};
  c.detector = {false, 0.8, 0.01};
  c.engine = Engine::MonteCarlo;
  c.trials = 50'000;
  c.seed = 4242;
  ProtocolConfig ideal = c;
  ideal.detector = DetectorModel{true, 1.0, 0.0};
  auto branches = protocol_branches(ideal, system_state(c.n, c.source));
  auto serial = sample_patterns_serial(c, branches);
  for (int threads : {1, 3, 8}) {
    omp_set_num_threads(threads);
    CHECK(sample_patterns(c, branches) == serial);
  }
}
