#pragma once

#include <array>
#include <cstdint>

#include "core/counts.hpp"
#include "core/engine.hpp"

namespace llab {

// Which denominator turns counts into a correlation.  ObservedCoincidences is
// what coincidence-counting experiments report; EmittedPairs charges every
// emitted pair to the denominator, detected or not (the event-ready view).
enum class Denominator { ObservedCoincidences, EmittedPairs };

struct Estimate {
  double value = 0.0;
  bool defined = false;  // false only for ObservedCoincidences with zero coincidences
  double standard_error = 0.0;
  Denominator kind = Denominator::ObservedCoincidences;
  double coincidence_total = 0.0;
};

// E = (nn + ss - ns - sn) / D.  Standard errors by the delta method: binomial
// in the like fraction for the observed denominator, multinomial for the
// emitted one.  Throws std::invalid_argument when emitted is not positive.
Estimate estimate_e(const RealCounts& table, Denominator kind);

struct BellReport {
  std::array<Estimate, 4> terms{};  // E(a,b), E(a,b'), E(a',b), E(a',b')
  double s_value = 0.0;
  bool defined = false;
  double standard_error = 0.0;
  bool violates_classical = false;  // |S| > 2
  bool exceeds_qm = false;          // |S| > 2*sqrt(2)
};

// S = terms[0] - terms[1] + terms[2] + terms[3], errors added in quadrature.
// Table order matches run_chsh.
BellReport chsh(const std::array<RealCounts, 4>& tables, Denominator kind);

struct SubtractionResult {
  RealCounts adjusted;
  // Estimated accidental contribution per coincidence cell, before clipping.
  double acc_nn = 0.0, acc_ss = 0.0, acc_ns = 0.0, acc_sn = 0.0;
  int clipped_cells = 0;      // cells that would have gone negative
  double clipped_mass = 0.0;  // total amount clipped away
};

// Standard accidental-coincidence subtraction: estimate the uncorrelated
// background in each coincidence cell from the per-side firing totals,
//   acc_XY = (side A fired X) * (side B fired Y) / emitted,
// and subtract it, clipping at zero.  Only the four coincidence cells change.
SubtractionResult subtract_accidentals(const RealCounts& table);

enum class VisibilityRate { LikeCoincidences, NnOnly };

// (max - min) / (max + min) over per-pair coincidence rates of a scan.  Needs
// at least two entries and a nonzero maximum; throws otherwise.
double visibility(const ScanResult& scan, VisibilityRate rate = VisibilityRate::LikeCoincidences);

// Single-channel consistency statistic: |r_narrow - r_wide| / r_removed - 1/4,
// where the r are coincidence rates at the two settings and with analysers
// removed.  Local models with a fixed detection cap keep it <= 0; the ideal
// quantum curve breaks the bound.  Throws when r_removed is not positive.
double freedman_delta(double rate_narrow, double rate_wide, double rate_removed);

struct DiagnosticsReport {
  // (max - min) / max over per-pair total coincidence rates; 0 when all zero.
  double total_rate_max_relative_variation = 0.0;
  // |total rate near phi = pi/4  -  total rate near phi = 3*pi/4|.
  double bell_angle_totals_gap = 0.0;
  // Largest |z| between nn rates of entries with equal phi but different
  // absolute settings; 0 when the scan has no such pair.
  double rotational_invariance_max_z = 0.0;
  // z score of the aggregated ns versus sn counts.
  double ns_sn_asymmetry_z = 0.0;
};

// Fair-sampling checks over a scan: a detection model that hides pairs
// setting-dependently shows up as total-rate variation; misalignment shows up
// as ns/sn asymmetry.  Throws on an empty scan.
DiagnosticsReport fair_sampling_diagnostics(const ScanResult& scan);

}  // namespace llab
