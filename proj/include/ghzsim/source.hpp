#pragma once

#include "ghzsim/fock.hpp"

namespace ghzsim {

struct SourceParams {
  double p = 0.01;  // pair-emission probability per pump pulse, 0 < p < 1
  int j_max = 2;    // highest power of the pair-creation operator kept

  void validate() const;
};

/// Truncated series sum_{j<=j_max} (sqrt(p) H)^j / j! |0> on channel c, where
/// H = (r_c^dagger h_c^dagger + l_c^dagger v_c^dagger) / sqrt(2). Left unnormalized.
Ket pair_state(const SourceParams& params, int channel);

/// Product of pair_state over channels 1..n. Throws std::invalid_argument for n < 2.
Ket system_state(int n, const SourceParams& params);

}  // namespace ghzsim
