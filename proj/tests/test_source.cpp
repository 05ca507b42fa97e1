#include <doctest.h>

#include <cmath>

#include "ghzsim/source.hpp"
#include "oracle.hpp"

using namespace ghzsim;
using namespace ghzsim::modes;

namespace {
constexpr double kTol = 1e-12;
double max_diff(const Ket& a, const Ket& b) { return oracle::max_diff(oracle::as_poly(a), oracle::as_poly(b)); }
}  // namespace

TEST_CASE("zeroth order is the vacuum") {
  Ket k = pair_state({0.3, 0}, 1);
  REQUIRE(k.size() == 1);
  CHECK(max_diff(k, vacuum()) < kTol);
}

TEST_CASE("first order pair amplitudes") {
  Ket k = pair_state({0.04, 1}, 1);
  CHECK(k.size() == 3);
  CHECK(std::abs(k.amplitude(FockBasisState{}) - 1.0) < kTol);
  CHECK(std::abs(k.amplitude(FockBasisState({{r(1), 1}, {h(1), 1}})) - 0.1414213562373095) < kTol);
  CHECK(std::abs(k.amplitude(FockBasisState({{l(1), 1}, {v(1), 1}})) - 0.1414213562373095) < kTol);
}

TEST_CASE("second order pair amplitudes (frozen from the polynomial oracle)") {
  Ket k = pair_state({0.04, 2}, 1);
  CHECK(k.size() == 6);
  // p/2 on each of the three two-pair states
  CHECK(std::abs(k.amplitude(FockBasisState({{r(1), 2}, {h(1), 2}})) - 0.02) < kTol);
  CHECK(std::abs(k.amplitude(FockBasisState({{l(1), 2}, {v(1), 2}})) - 0.02) < kTol);
  CHECK(std::abs(k.amplitude(FockBasisState({{r(1), 1}, {l(1), 1}, {h(1), 1}, {v(1), 1}})) - 0.02) < kTol);
}

TEST_CASE("pair_state agrees with the oracle series for several orders") {
  for (int j = 0; j <= 4; ++j) {
    for (double p : {0.01, 0.2, 0.7}) {
      for (int c : {1, 3}) {
        CHECK(oracle::max_diff(oracle::as_poly(pair_state({p, j}, c)), oracle::to_state(oracle::pair_poly(p, j, c))) <
              kTol);
      }
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(pair_state({0.0, 1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(pair_state({1.0, 1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(pair_state({0.1, -1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(pair_state({0.1, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(system_state(1, {0.1, 1}), std::invalid_argument);
}

TEST_CASE("system state") {
  const SourceParams first{0.04, 1};
  Ket s2 = system_state(2, first);
  CHECK(std::abs(s2.amplitude(FockBasisState({{r(1), 1}, {h(1), 1}, {r(2), 1}, {h(2), 1}})) - 0.02) < kTol);
  CHECK(max_diff(s2, tensor(pair_state(first, 1), pair_state(first, 2))) < kTol);
  for (int n = 2; n <= 5; ++n) {
    CHECK(std::abs(norm_sq(system_state(n, first)) - std::pow(1.04, n)) < kTol);
  }
  CHECK(oracle::max_diff(oracle::as_poly(system_state(3, {0.1, 2})), oracle::to_state(oracle::system_poly(3, 0.1, 2))) <
        kTol);
}

TEST_CASE("one-photon-per-channel sector has 2^n equal-magnitude terms") {
  for (int n = 2; n <= 4; ++n) {
    for (double p : {0.01, 0.1}) {
      Ket s = system_state(n, {p, 2});
      int count = 0;
      for (const auto& [b, a] : s.terms()) {
        bool one_each = true;
        for (int c = 1; c <= n; ++c) one_each = one_each && b.occupation(h(c)) + b.occupation(v(c)) == 1;
        if (!one_each) continue;
        ++count;
        CHECK(std::abs(std::abs(a) - std::pow(p / 2, n / 2.0)) < kTol);
      }
      CHECK(count == (1 << n));
    }
  }
}

TEST_CASE("exchange symmetry r<->l with h<->v within a channel") {
  Ket s = system_state(2, {0.2, 3});
  for (const auto& [b, a] : s.terms()) {
    std::map<ModeId, int> swapped;
    for (const auto& [m, k] : b.entries()) {
      ModeId t = m;
      if (m.channel == 1) {
        if (m.kind == ModeKind::EnsembleR) t.kind = ModeKind::EnsembleL;
        else if (m.kind == ModeKind::EnsembleL) t.kind = ModeKind::EnsembleR;
        else if (m.kind == ModeKind::PhotonH) t.kind = ModeKind::PhotonV;
        else if (m.kind == ModeKind::PhotonV) t.kind = ModeKind::PhotonH;
      }
      swapped[t] = static_cast<int>(k);
    }
    CHECK(std::abs(s.amplitude(FockBasisState(swapped)) - a) < kTol);
  }
}

TEST_CASE("monotone truncation") {
  for (int j = 0; j < 4; ++j) {
    Ket lo = pair_state({0.3, j}, 1), hi = pair_state({0.3, j + 1}, 1);
    for (const auto& [b, a] : lo.terms()) CHECK(hi.amplitude(b) == a);
    CHECK(hi.size() > lo.size());
  }
}
