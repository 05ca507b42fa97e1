#include "ghzsim/source.hpp"

#include <cmath>
#include <numbers>

namespace ghzsim {

void SourceParams::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (j_max < 0) throw std::invalid_argument("j_max must be non-negative");
}

Ket pair_state(const SourceParams& params, int channel) {
  params.validate();
  if (channel < 1) throw std::invalid_argument("channel index must be >= 1");
  const ModeId r = modes::r(channel), l = modes::l(channel);
  const ModeId h = modes::h(channel), v = modes::v(channel);

  // Apply sqrt(p) H / j repeatedly, so the j-th power carries its 1/j! factor.
  Ket power = vacuum();
  Ket sum = power;
  const double g = std::sqrt(params.p) / std::numbers::sqrt2;
  for (int j = 1; j <= params.j_max; ++j) {
    Ket rh = apply_creation(apply_creation(power, r), h);
    Ket lv = apply_creation(apply_creation(power, l), v);
    power = add(rh, lv).scaled(g / j);
    sum = add(sum, power);
  }
  return sum;
}

Ket system_state(int n, const SourceParams& params) {
  if (n < 2) throw std::invalid_argument("system_state needs at least two parties");
  Ket state = pair_state(params, 1);
  for (int c = 2; c <= n; ++c) state = tensor(state, pair_state(params, c));
  return state;
}

}  // namespace ghzsim
