#pragma once

#include <string>
#include <vector>

#include "ghzsim/fock.hpp"

namespace ghzsim {

/// Linear map on creation operators: input mode i -> sum_j matrix(j, i) * output mode j.
///
/// Ordinary elements act on a fixed mode set (outputs == inputs). Elements that route
/// photons onto fresh modes (detector relabeling, loss) carry a separate output list;
/// a rectangular map must be flagged as an isometry. Columns are always orthonormal
/// within 1e-10, which is checked on construction.
class ModeUnitary {
 public:
  ModeUnitary(std::vector<ModeId> modes, std::vector<Amplitude> matrix);
  ModeUnitary(std::vector<ModeId> inputs, std::vector<ModeId> outputs, std::vector<Amplitude> matrix,
              bool isometry = false);

  static ModeUnitary identity(std::vector<ModeId> modes);

  const std::vector<ModeId>& inputs() const { return inputs_; }
  const std::vector<ModeId>& outputs() const { return outputs_; }
  std::size_t rows() const { return outputs_.size(); }
  std::size_t cols() const { return inputs_.size(); }
  bool is_isometry() const { return isometry_; }

  Amplitude at(std::size_t row, std::size_t col) const { return matrix_[row * cols() + col]; }
  /// Coefficient of output mode `out` in the image of input mode `in`; zero if either is absent.
  Amplitude entry(ModeId out, ModeId in) const;

  /// max |(U^dagger U - I)_{ij}|.
  double unitarity_defect() const;

 private:
  std::vector<ModeId> inputs_;
  std::vector<ModeId> outputs_;
  std::vector<Amplitude> matrix_;  // row-major, rows() x cols()
  bool isometry_ = false;
};

ModeUnitary hwp45(ModeId h, ModeId v);
/// h-modes transmitted, v-modes exchanged between the two ports. No reflection phase.
ModeUnitary pbs(ModeId h1, ModeId v1, ModeId h2, ModeId v2);
ModeUnitary phase_plate(ModeId m, double phi);
/// Permutation moving each `from[i]` onto `to[i]`.
ModeUnitary relabel(std::vector<ModeId> from, std::vector<ModeId> to);
/// Splits `m` onto itself (amplitude sqrt(eta)) and `loss` (sqrt(1 - eta)).
ModeUnitary loss_channel(ModeId m, ModeId loss, double eta);

/// Apply `first`, then `second`. Modes missing from either element pass through.
ModeUnitary compose(const ModeUnitary& first, const ModeUnitary& second);

/// Substitutes every creation operator on u.inputs() and re-expands on the outputs.
/// Parallel over distinct input-mode occupations; bit-identical to the serial reference.
Ket apply_mode_unitary(const Ket& ket, const ModeUnitary& u);
/// Single-threaded term-by-term reference for apply_mode_unitary.
Ket apply_mode_unitary_serial(const Ket& ket, const ModeUnitary& u);

struct DetectorModel {
  bool resolving = false;
  double efficiency = 1.0;
  double dark_rate = 0.0;

  void validate() const;
  bool ideal() const { return efficiency == 1.0 && dark_rate == 0.0; }
};

/// Detector outcome: detector mode -> registered count (0/1 under threshold detectors).
/// Only nonzero entries are stored, in canonical mode order.
class ClickPattern {
 public:
  using Entry = std::pair<ModeId, unsigned>;

  ClickPattern() = default;
  explicit ClickPattern(std::vector<Entry> clicks);

  const std::vector<Entry>& clicks() const { return clicks_; }
  unsigned count(ModeId m) const;
  std::size_t fired() const { return clicks_.size(); }

  /// Space-separated detector labels; counts above one are written as "Dh1:2".
  std::string label() const;

  friend auto operator<=>(const ClickPattern&, const ClickPattern&) = default;
  friend bool operator==(const ClickPattern&, const ClickPattern&) = default;

 private:
  std::vector<Entry> clicks_;
};

enum class PatternClass { MPlus, MMinus, Other };

/// One measurement record together with the state it leaves behind.
///
/// `components` are mutually incoherent unnormalized kets on the undetected modes: the
/// conditioned state is sum_k |c_k><c_k| / weight. `weight` is the squared norm that the
/// record carries in the (possibly unnormalized) input; `probability` = weight / norm^2(input).
struct OutcomeBranch {
  ClickPattern pattern;
  double probability = 0.0;
  double weight = 0.0;
  std::vector<Ket> components;
  PatternClass cls = PatternClass::Other;
};

std::vector<OutcomeBranch> measure_modes(const Ket& ket, const std::vector<ModeId>& detector_modes,
                                         const DetectorModel& model);

}  // namespace ghzsim
