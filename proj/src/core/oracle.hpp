#pragma once

#include <cstdint>

#include "core/model.hpp"

namespace llab::oracle {

// Independent cross-checks for the closed forms and the simulator: midpoint
// product-rule quadrature over the sphere in (cos polar) x azimuth, and a
// direct Monte Carlo estimate with a binomial error bar.  Both integrate the
// same per-side classification the engine uses, so a bug in the closed forms
// cannot hide in shared code.

struct QuadratureSpec {
  int polar_steps = 2000;
  int azimuth_steps = 4000;
};

// Joint outcome probabilities per side category: N, S, no detection, invalid.
struct JointProbabilities {
  enum Category { kN = 0, kS = 1, kNone = 2, kInvalid = 3 };
  double p[4][4]{};  // [side A category][side B category]

  double coincidence(Channel a, Channel b) const {
    return p[a == Channel::N ? kN : kS][b == Channel::N ? kN : kS];
  }
  double sum() const {
    double s = 0.0;
    for (const auto& row : p)
      for (double v : row) s += v;
    return s;
  }
};

// Integrate the joint outcome distribution at fixed settings.  Stochastic
// detector responses contribute their per-channel probabilities; deterministic
// ones an indicator.  The source density is folded in and normalised away.
// Accumulation order is fixed, so equal inputs give bit-equal results.
// Throws std::invalid_argument on non-positive step counts.
JointProbabilities quad_joint(const DetectorModel& detector_a, double setting_a,
                              const DetectorModel& detector_b, double setting_b,
                              const SourceModel& source, bool identical_spins,
                              const QuadratureSpec& spec);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimate of one coincidence probability, n_samples events keyed
// by (seed, stream 0, event).  Throws std::invalid_argument when n_samples is 0.
McEstimate mc_coincidence(const DetectorModel& detector_a, double setting_a,
                          const DetectorModel& detector_b, double setting_b,
                          const SourceModel& source, bool identical_spins, Channel out_a,
                          Channel out_b, std::uint64_t n_samples, std::uint64_t seed);

// Overlap fraction of two equal caps of half-angle beta with axes 2*alpha
// apart, by quadrature / Monte Carlo.  Checks cap_overlap_fraction directly.
double cap_overlap_quad(double alpha, double beta, const QuadratureSpec& spec);
McEstimate cap_overlap_mc(double alpha, double beta, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace llab::oracle
