#include "core/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "core/geometry.hpp"

namespace llab::analytic {

namespace {

// Arguments sit exactly on +/-1 at branch boundaries and can drift past by a
// couple of ulps; clamp rather than let acos return NaN.
double clamped_acos(double x) { return std::acos(std::clamp(x, -1.0, 1.0)); }

void check_phi(double phi, const char* who) {
  if (!(phi >= 0.0 && phi <= kPi)) throw std::domain_error(std::string(who) + ": phi outside [0, pi]");
}

}  // namespace

double cap_overlap_fraction(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= kPi / 2.0))
    throw std::domain_error("cap_overlap_fraction: alpha outside [0, pi/2]");
  if (!(beta > 0.0 && beta <= kPi / 2.0))
    throw std::domain_error("cap_overlap_fraction: beta outside (0, pi/2]");
  if (alpha >= beta) return 0.0;
  if (alpha == 0.0) return 0.5 * (1.0 - std::cos(beta));
  const double lune = clamped_acos(std::sin(alpha) / std::sin(beta));
  const double base = clamped_acos(std::tan(alpha) / std::tan(beta));
  // The exact value lies in [0, full cap fraction]; cancellation between the
  // two terms near alpha -> beta can undershoot zero by ~1e-10.
  const double full = 0.5 * (1.0 - std::cos(beta));
  return std::clamp((lune - base * std::cos(beta)) / kPi, 0.0, full);
}

double p_like(double phi, double beta) {
  check_phi(phi, "p_like");
  return cap_overlap_fraction(0.5 * phi, beta);
}

double p_unlike(double phi, double beta) {
  check_phi(phi, "p_unlike");
  return cap_overlap_fraction(0.5 * (kPi - phi), beta);
}

double total_rate(double phi, double beta) { return 2.0 * (p_like(phi, beta) + p_unlike(phi, beta)); }

Correlation correlation_normalised(double phi, double beta) {
  Correlation c;
  c.numerator = 2.0 * (p_like(phi, beta) - p_unlike(phi, beta));
  c.denominator = total_rate(phi, beta);
  if (c.denominator > 0.0) {
    c.value = c.numerator / c.denominator;
    c.defined = true;
  }
  return c;
}

double correlation_unnormalised(double phi, double beta) {
  return 2.0 * (p_like(phi, beta) - p_unlike(phi, beta));
}

double effective_phi(double phi, bool identical_spins) {
  return identical_spins ? phi : kPi - phi;
}

ChshValue chsh_analytic(const BallParams& params, double a, double a_prime, double b,
                        double b_prime, CorrelationKind kind) {
  const double seps[4] = {
      fold_angle_difference(b - a),
      fold_angle_difference(b_prime - a),
      fold_angle_difference(b - a_prime),
      fold_angle_difference(b_prime - a_prime),
  };
  const double signs[4] = {1.0, -1.0, 1.0, 1.0};

  ChshValue out;
  out.defined = true;
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double phi = effective_phi(seps[i], params.identical_spins);
    if (kind == CorrelationKind::Normalised) {
      out.terms[i] = correlation_normalised(phi, params.beta);
    } else {
      Correlation c;
      c.numerator = correlation_unnormalised(phi, params.beta);
      c.denominator = 1.0;
      c.value = c.numerator;
      c.defined = true;
      out.terms[i] = c;
    }
    if (!out.terms[i].defined) {
      out.defined = false;
      continue;
    }
    s += signs[i] * out.terms[i].value;
  }
  if (out.defined) out.value = s;
  return out;
}

double qm_coincidence(double phi) {
  const double c = std::cos(0.5 * phi);
  return 0.5 * c * c;
}

double qm_correlation(double phi) { return std::cos(phi); }

}  // namespace llab::analytic
