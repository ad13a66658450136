#include "core/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace llab {

Estimate estimate_e(const RealCounts& table, Denominator kind) {
  if (!(table.emitted > 0.0)) throw std::invalid_argument("estimate_e: emitted must be positive");
  Estimate e;
  e.kind = kind;
  const double like = table.nn + table.ss;
  const double unlike = table.ns + table.sn;
  const double coinc = like + unlike;
  e.coincidence_total = coinc;
  if (kind == Denominator::ObservedCoincidences) {
    if (!(coinc > 0.0)) return e;  // no coincidences: correlation undefined
    e.value = (like - unlike) / coinc;
    // E = 2q - 1 with q the like fraction, so se(E) = 2 se(q).
    const double q = like / coinc;
    e.standard_error = 2.0 * std::sqrt(std::max(0.0, q * (1.0 - q)) / coinc);
    e.defined = true;
  } else {
    e.value = (like - unlike) / table.emitted;
    // Multinomial over {like, unlike, rest}: var = (coinc/n - E^2) / n.
    const double n = table.emitted;
    e.standard_error = std::sqrt(std::max(0.0, coinc / n - e.value * e.value) / n);
    e.defined = true;
  }
  return e;
}

BellReport chsh(const std::array<RealCounts, 4>& tables, Denominator kind) {
  static constexpr double signs[4] = {1.0, -1.0, 1.0, 1.0};
  BellReport r;
  r.defined = true;
  double s = 0.0;
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    r.terms[i] = estimate_e(tables[i], kind);
    if (!r.terms[i].defined) {
      r.defined = false;
      continue;
    }
    s += signs[i] * r.terms[i].value;
    var += r.terms[i].standard_error * r.terms[i].standard_error;
  }
  if (!r.defined) return r;
  r.s_value = s;
  r.standard_error = std::sqrt(var);
  r.violates_classical = std::fabs(s) > 2.0;
  r.exceeds_qm = std::fabs(s) > 2.0 * std::sqrt(2.0);
  return r;
}

SubtractionResult subtract_accidentals(const RealCounts& table) {
  if (!(table.emitted > 0.0))
    throw std::invalid_argument("subtract_accidentals: emitted must be positive");
  const double a_n = table.nn + table.ns + table.a_only_n;
  const double a_s = table.ss + table.sn + table.a_only_s;
  const double b_n = table.nn + table.sn + table.b_only_n;
  const double b_s = table.ss + table.ns + table.b_only_s;

  SubtractionResult r;
  r.adjusted = table;
  r.acc_nn = a_n * b_n / table.emitted;
  r.acc_ss = a_s * b_s / table.emitted;
  r.acc_ns = a_n * b_s / table.emitted;
  r.acc_sn = a_s * b_n / table.emitted;

  auto subtract = [&r](double& cell, double acc) {
    const double adjusted = cell - acc;
    if (adjusted < 0.0) {
      ++r.clipped_cells;
      r.clipped_mass += -adjusted;
      cell = 0.0;
    } else {
      cell = adjusted;
    }
  };
  subtract(r.adjusted.nn, r.acc_nn);
  subtract(r.adjusted.ss, r.acc_ss);
  subtract(r.adjusted.ns, r.acc_ns);
  subtract(r.adjusted.sn, r.acc_sn);
  return r;
}

namespace {

double pick_rate(const ScanEntry& e, VisibilityRate rate) {
  const RealCounts t = e.counts;
  if (!(t.emitted > 0.0)) throw std::invalid_argument("visibility: entry with zero emitted");
  const double num = rate == VisibilityRate::NnOnly ? t.nn : t.nn + t.ss;
  return num / t.emitted;
}

}  // namespace

double visibility(const ScanResult& scan, VisibilityRate rate) {
  if (scan.entries.size() < 2)
    throw std::invalid_argument("visibility: need at least two scan entries");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : scan.entries) {
    const double r = pick_rate(e, rate);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!(hi > 0.0)) throw std::invalid_argument("visibility: all rates are zero");
  return (hi - lo) / (hi + lo);
}

double freedman_delta(double rate_narrow, double rate_wide, double rate_removed) {
  if (!(rate_removed > 0.0))
    throw std::invalid_argument("freedman_delta: analyser-removed rate must be positive");
  return std::fabs(rate_narrow - rate_wide) / rate_removed - 0.25;
}

DiagnosticsReport fair_sampling_diagnostics(const ScanResult& scan) {
  if (scan.entries.empty())
    throw std::invalid_argument("fair_sampling_diagnostics: empty scan");

  DiagnosticsReport rep;
  const auto total_rate = [](const ScanEntry& e) {
    return static_cast<double>(e.counts.coincidences()) / static_cast<double>(e.counts.emitted);
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : scan.entries) {
    const double r = total_rate(e);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.total_rate_max_relative_variation = hi > 0.0 ? (hi - lo) / hi : 0.0;

  // Totals at the two separations a CHSH run actually uses.
  const auto nearest = [&scan](double target) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scan.entries.size(); ++i) {
      const double d = std::fabs(scan.entries[i].phi() - target);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t i1 = nearest(kPi / 4.0);
  const std::size_t i2 = nearest(3.0 * kPi / 4.0);
  rep.bell_angle_totals_gap = std::fabs(total_rate(scan.entries[i1]) - total_rate(scan.entries[i2]));

  // Entries whose separation matches but whose absolute settings differ should
  // agree: the model is rotationally invariant unless a detector is skewed.
  for (std::size_t i = 0; i < scan.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < scan.entries.size(); ++j) {
      const ScanEntry& x = scan.entries[i];
      const ScanEntry& y = scan.entries[j];
      if (std::fabs(x.phi() - y.phi()) > 1e-9) continue;
      if (std::fabs(x.setting_a - y.setting_a) < 1e-9 &&
          std::fabs(x.setting_b - y.setting_b) < 1e-9)
        continue;
      const double nx = static_cast<double>(x.counts.emitted);
      const double ny = static_cast<double>(y.counts.emitted);
      const double px = static_cast<double>(x.counts.nn) / nx;
      const double py = static_cast<double>(y.counts.nn) / ny;
      const double var = px * (1.0 - px) / nx + py * (1.0 - py) / ny;
      if (!(var > 0.0)) continue;
      rep.rotational_invariance_max_z =
          std::max(rep.rotational_invariance_max_z, std::fabs(px - py) / std::sqrt(var));
    }
  }

  double ns = 0.0, sn = 0.0;
  for (const auto& e : scan.entries) {
    ns += static_cast<double>(e.counts.ns);
    sn += static_cast<double>(e.counts.sn);
  }
  rep.ns_sn_asymmetry_z = ns + sn > 0.0 ? (ns - sn) / std::sqrt(ns + sn) : 0.0;
  return rep;
}

}  // namespace llab
