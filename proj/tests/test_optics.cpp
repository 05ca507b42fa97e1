#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ghzsim/analyzer.hpp"
#include "ghzsim/optics.hpp"
#include "ghzsim/protocol.hpp"
#include "oracle.hpp"

using namespace ghzsim;
using modes::h;
using modes::v;

namespace {
constexpr double kTol = 1e-12;
const double kS = 1.0 / std::sqrt(2.0);

double max_diff(const Ket& a, const Ket& b) { return oracle::max_diff(oracle::as_poly(a), oracle::as_poly(b)); }

Ket ket(std::map<ModeId, int> occ) { return basis_ket(occ); }

double matrix_diff(const ModeUnitary& a, const ModeUnitary& b) {
  double worst = 0.0;
  for (ModeId in : a.inputs()) {
    for (ModeId out : a.outputs()) worst = std::max(worst, std::abs(a.entry(out, in) - b.entry(out, in)));
  }
  for (ModeId in : b.inputs()) {
    for (ModeId out : b.outputs()) worst = std::max(worst, std::abs(a.entry(out, in) - b.entry(out, in)));
  }
  return worst;
}
}  // namespace

TEST_CASE("identity leaves kets unchanged") {
  Ket psi = add(ket({{h(1), 2}, {v(1), 1}}), ket({{h(2), 1}}).scaled(0.5));
  CHECK(max_diff(apply_mode_unitary(psi, ModeUnitary::identity({h(1), v(1)})), psi) < kTol);
}

TEST_CASE("Hong-Ou-Mandel on a 50/50 splitter") {
  ModeUnitary bs({h(1), h(2)}, {kS, kS, kS, -kS});
  Ket out = apply_mode_unitary(ket({{h(1), 1}, {h(2), 1}}), bs);
  Ket expected = add(ket({{h(1), 2}}).scaled(kS), ket({{h(2), 2}}).scaled(-kS));
  CHECK(max_diff(out, expected) < kTol);
}

TEST_CASE("half-wave plate at 45 degrees") {
  auto w = hwp45(h(1), v(1));
  CHECK(max_diff(apply_mode_unitary(ket({{h(1), 1}}), w), add(ket({{h(1), 1}}), ket({{v(1), 1}})).scaled(kS)) < kTol);
  CHECK(max_diff(apply_mode_unitary(ket({{v(1), 1}}), w), add(ket({{h(1), 1}}), ket({{v(1), 1}}).scaled(-1))
                                                              .scaled(kS)) < kTol);
  // ((h + v)/sqrt2)^2 / sqrt2 |0> = (|2,0> + sqrt2 |1,1> + |0,2>) / 2
  Ket two = apply_mode_unitary(ket({{h(1), 2}}), w);
  Ket expected = add(add(ket({{h(1), 2}}).scaled(0.5), ket({{h(1), 1}, {v(1), 1}}).scaled(std::sqrt(2.0) / 2)),
                     ket({{v(1), 2}}).scaled(0.5));
  CHECK(max_diff(two, expected) < kTol);
  CHECK(matrix_diff(compose(w, w), ModeUnitary::identity({h(1), v(1)})) < kTol);
  CHECK_THROWS_AS(hwp45(h(1), h(1)), std::invalid_argument);
}

TEST_CASE("polarizing beam splitter transmits h and reflects v") {
  auto b = pbs(h(1), v(1), h(2), v(2));
  CHECK(max_diff(apply_mode_unitary(ket({{h(1), 1}}), b), ket({{h(1), 1}})) < kTol);
  CHECK(max_diff(apply_mode_unitary(ket({{v(1), 1}}), b), ket({{v(2), 1}})) < kTol);
  CHECK(max_diff(apply_mode_unitary(ket({{v(2), 1}}), b), ket({{v(1), 1}})) < kTol);
  CHECK(b.unitarity_defect() == 0.0);
  CHECK(matrix_diff(compose(b, pbs(h(2), v(2), h(1), v(1))), ModeUnitary::identity({h(1), v(1), h(2), v(2)})) < kTol);
  CHECK_THROWS_AS(pbs(h(1), v(1), h(1), v(2)), std::invalid_argument);
}

TEST_CASE("phase plate") {
  Ket one = ket({{h(1), 1}});
  CHECK(max_diff(apply_mode_unitary(one, phase_plate(h(1), 0.0)), one) < kTol);
  CHECK(max_diff(apply_mode_unitary(one, phase_plate(h(1), std::numbers::pi)), one.scaled(-1.0)) < kTol);
  auto round_trip = compose(phase_plate(h(1), 0.7), phase_plate(h(1), -0.7));
  CHECK(matrix_diff(round_trip, ModeUnitary::identity({h(1)})) < kTol);
}

TEST_CASE("compose with identity and across disjoint modes") {
  auto w = hwp45(h(1), v(1));
  CHECK(matrix_diff(compose(ModeUnitary::identity({h(1), v(1)}), w), w) < kTol);
  CHECK(matrix_diff(compose(w, ModeUnitary::identity({h(1), v(1)})), w) < kTol);
  // compose(a, b) applies a first
  auto a = hwp45(h(1), v(1));
  auto b = phase_plate(v(1), std::numbers::pi / 2);
  Ket in = ket({{h(1), 1}, {v(1), 1}});
  CHECK(max_diff(apply_mode_unitary(in, compose(a, b)), apply_mode_unitary(apply_mode_unitary(in, a), b)) < kTol);
}

TEST_CASE("constructor rejects malformed elements") {
  CHECK_THROWS_AS(ModeUnitary({h(1), v(1)}, {1.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ModeUnitary({h(1), h(1)}, {1.0, 0.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ModeUnitary({h(1), v(1)}, {1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_NOTHROW(loss_channel(h(1), modes::loss(1), 0.3));
  CHECK_THROWS_AS(loss_channel(h(1), modes::loss(1), 1.5), std::invalid_argument);
}

TEST_CASE("substitution kernel matches the polynomial oracle on random inputs") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const std::vector<ModeId> support{h(1), v(1), h(2), v(2), modes::r(1)};
  for (int trial = 0; trial < 30; ++trial) {
    // random element built from plates and splitters on the four photon modes
    ModeUnitary u = compose(hwp45(h(1), v(1)), phase_plate(v(1), angle(rng)));
    u = compose(u, pbs(h(1), v(1), h(2), v(2)));
    u = compose(u, phase_plate(h(2), angle(rng)));
    u = compose(u, hwp45(h(2), v(2)));
    Ket psi = oracle::random_ket(rng, support, 4, 5);

    oracle::Poly expected;
    for (const auto& [s, a] : psi.terms()) {
      oracle::Poly term{{oracle::Mono{}, a}};
      double norm = 1.0;
      for (const auto& [mode, k] : s.entries()) {
        norm *= std::tgamma(k + 1.0);
        oracle::Poly factor = oracle::var(mode.label());
        auto col = std::find(u.inputs().begin(), u.inputs().end(), mode);
        if (col != u.inputs().end()) {
          factor.clear();
          for (ModeId out : u.outputs()) {
            if (u.entry(out, mode) != Amplitude{}) factor[{{out.label(), 1}}] += u.entry(out, mode);
          }
        }
        for (unsigned t = 0; t < k; ++t) term = oracle::mul(term, factor);
      }
      expected = oracle::add(expected, oracle::scale(term, 1.0 / std::sqrt(norm)));
    }
    Ket out = apply_mode_unitary(psi, u);
    CHECK(oracle::max_diff(oracle::as_poly(out), oracle::to_state(expected)) < 1e-12);
    CHECK(std::abs(norm_sq(out) - norm_sq(psi)) < 1e-12 * (1.0 + norm_sq(psi)));
    CHECK(u.unitarity_defect() < 1e-10);
  }
}

TEST_CASE("photon number is conserved and occupied outputs are rejected") {
  Ket psi = ket({{h(1), 2}, {v(1), 1}, {h(2), 1}});
  Ket out = apply_mode_unitary(psi, compose(hwp45(h(1), v(1)), pbs(h(1), v(1), h(2), v(2))));
  for (const auto& kv : out.terms()) CHECK(kv.first.total() == 4);
  CHECK_THROWS_AS(apply_mode_unitary(ket({{h(1), 1}, {modes::dh(1), 1}}), relabel({h(1)}, {modes::dh(1)})),
                  std::invalid_argument);
}

TEST_CASE("measure_modes on simple states") {
  const ModeId d1 = modes::dh(1), d2 = modes::dh(2);
  DetectorModel ideal{};

  auto single = measure_modes(ket({{d1, 1}}), {d1, d2}, ideal);
  REQUIRE(single.size() == 1);
  CHECK(single[0].pattern.label() == "Dh1");
  CHECK(single[0].probability == doctest::Approx(1.0));
  REQUIRE(single[0].components.size() == 1);
  CHECK(max_diff(single[0].components[0], vacuum()) < kTol);

  Ket phi1 = ket({{h(3), 1}}), phi2 = ket({{v(3), 1}});
  Ket psi = add(tensor(ket({{d1, 1}}), phi1), tensor(ket({{d2, 1}}), phi2)).scaled(kS);
  auto two = measure_modes(psi, {d1, d2}, ideal);
  REQUIRE(two.size() == 2);
  CHECK(two[0].probability == doctest::Approx(0.5));
  CHECK(two[1].probability == doctest::Approx(0.5));
  CHECK(std::abs(fidelity(two[0], phi1) - 1.0) < kTol);

  auto lossy = measure_modes(ket({{d1, 1}}), {d1}, DetectorModel{false, 0.6, 0.0});
  REQUIRE(lossy.size() == 2);
  CHECK(lossy[0].pattern.fired() == 0);
  CHECK(std::abs(lossy[0].probability - 0.4) < kTol);
  CHECK(std::abs(lossy[1].probability - 0.6) < kTol);

  CHECK_THROWS_AS(measure_modes(Ket{}, {d1}, ideal), ZeroNormError);
  CHECK_THROWS_AS(measure_modes(ket({{d1, 1}}), {d1}, DetectorModel{false, 1.2, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(measure_modes(ket({{d1, 1}}), {d1}, DetectorModel{false, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("efficiency thinning matches an explicit loss beamsplitter") {
  // Two photons in one detector mode, eta = 0.7: the traced loss mode gives Binomial(2, 0.7).
  const ModeId d = modes::dh(1);
  const double eta = 0.7;
  Ket two = ket({{d, 2}});
  auto thinned = measure_modes(two, {d}, DetectorModel{true, eta, 0.0});
  auto via_loss = measure_modes(apply_mode_unitary(two, loss_channel(d, modes::loss(1), eta)), {d, modes::loss(1)},
                                DetectorModel{true, 1.0, 0.0});
  std::map<unsigned, double> by_seen;
  for (const auto& b : via_loss) by_seen[b.pattern.count(d)] += b.probability;
  REQUIRE(thinned.size() == 3);
  for (const auto& b : thinned) CHECK(std::abs(b.probability - by_seen[b.pattern.count(d)]) < kTol);
}

TEST_CASE("dark counts") {
  const ModeId d1 = modes::dh(1), d2 = modes::dh(2);
  auto vac = measure_modes(vacuum(), {d1, d2}, DetectorModel{false, 1.0, 0.1});
  std::map<std::string, double> p;
  for (const auto& b : vac) p[b.pattern.label()] = b.probability;
  CHECK(std::abs(p[""] - 0.81) < kTol);
  CHECK(std::abs(p["Dh1"] - 0.09) < kTol);
  CHECK(std::abs(p["Dh1 Dh2"] - 0.01) < kTol);

  // threshold: a detector that already fires is unchanged by a dark click
  auto lit = measure_modes(ket({{d1, 1}}), {d1, d2}, DetectorModel{false, 1.0, 0.1});
  REQUIRE(lit.size() == 2);
  CHECK(std::abs(lit[0].probability - 0.9) < kTol);
}

TEST_CASE("branch probabilities: completeness, bijection and threshold coarsening") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<ModeId> dets{modes::dh(1), modes::dv(1), modes::dh(2)};
  for (int trial = 0; trial < 40; ++trial) {
    Ket psi = oracle::random_ket(rng, {modes::dh(1), modes::dv(1), modes::dh(2), modes::r(1)}, 3, 6);
    if (psi.is_zero()) continue;
    DetectorModel m{trial % 2 == 0, unit(rng), 0.3 * unit(rng)};
    double sum = 0.0;
    for (const auto& b : measure_modes(psi, dets, m)) sum += b.probability;
    CHECK(std::abs(sum - 1.0) < 1e-10);

    auto resolving = measure_modes(psi, dets, DetectorModel{true, 1.0, 0.0});
    std::set<std::vector<unsigned>> occupations;
    for (const auto& [s, a] : psi.terms()) {
      std::vector<unsigned> occ;
      for (ModeId d : dets) occ.push_back(s.occupation(d));
      occupations.insert(occ);
    }
    CHECK(resolving.size() == occupations.size());

    auto threshold = measure_modes(psi, dets, DetectorModel{false, 1.0, 0.0});
    std::map<std::string, double> coarse;
    for (const auto& b : resolving) {
      std::vector<ClickPattern::Entry> clicks;
      for (const auto& [d, k] : b.pattern.clicks()) clicks.emplace_back(d, 1u);
      coarse[ClickPattern(clicks).label()] += b.probability;
    }
    REQUIRE(threshold.size() == coarse.size());
    for (const auto& b : threshold) CHECK(std::abs(b.probability - coarse[b.pattern.label()]) < 1e-12);
  }
}
