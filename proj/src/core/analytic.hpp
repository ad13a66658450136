#pragma once

#include <array>

namespace llab::analytic {

// Closed forms for the rotating-ball local model.  Hidden variable: a unit
// vector lambda, uniform on the sphere.  Each analyser setting defines a
// detection cap of half-angle beta around its axis; a pair is recorded in a
// channel when lambda falls inside the corresponding cap.  Correlations follow
// from the overlap area of two caps whose axes are 2*alpha apart.

// Fractional solid angle of the intersection of two caps of half-angle beta
// whose axes are separated by 2*alpha.  alpha in [0, pi/2], beta in (0, pi/2].
// Piecewise: identical caps give (1 - cos beta)/2, disjoint caps (alpha >= beta)
// give zero, otherwise the lune formula
//   (1/pi) * (acos(sin a / sin b) - acos(tan a / tan b) * cos b).
// Throws std::domain_error outside the stated domains.
double cap_overlap_fraction(double alpha, double beta);

// Probability of a like coincidence (both N or both S, one quadrant of it) at
// analyser separation phi in [0, pi]:  cap_overlap_fraction(phi/2, beta).
double p_like(double phi, double beta);

// One quadrant of the unlike coincidence probability: the like overlap at the
// complementary half-separation (pi - phi)/2.
double p_unlike(double phi, double beta);

// Coincidence probability summed over all four channel pairs.
double total_rate(double phi, double beta);

// A correlation together with its validity.  When no coincidences are possible
// (the denominator vanishes) the value is undefined rather than NaN; callers
// must check `defined` before using `value`.
struct Correlation {
  double value = 0.0;
  bool defined = false;
  double numerator = 0.0;
  double denominator = 0.0;
};

// E(phi) with the observed-coincidence denominator 2*(p_like + p_unlike).
Correlation correlation_normalised(double phi, double beta);

// E(phi) with the emitted-pair denominator (always 1, so always defined).
double correlation_unnormalised(double phi, double beta);

enum class CorrelationKind { Normalised, Unnormalised };

// Model description shared with the simulator configs: cap half-angle plus the
// spin convention.  With opposite spins on side B every separation phi behaves
// like pi - phi.
struct BallParams {
  double beta = 0.0;
  bool identical_spins = true;
};

double effective_phi(double phi, bool identical_spins);

struct ChshValue {
  double value = 0.0;
  bool defined = false;                  // false when any term is undefined
  std::array<Correlation, 4> terms{};    // E(a,b), E(a,b'), E(a',b), E(a',b')
};

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b') from the closed forms above.
// Settings are radians; differences are folded into [0, pi] first.
ChshValue chsh_analytic(const BallParams& params, double a, double a_prime, double b,
                        double b_prime, CorrelationKind kind);

// Quantum references for the same observables: like-coincidence probability
// cos^2(phi/2)/2 per channel pair, correlation cos(phi).  The sign convention
// matches the model above (like coincidences dominate at phi = 0).
double qm_coincidence(double phi);
double qm_correlation(double phi);

}  // namespace llab::analytic
