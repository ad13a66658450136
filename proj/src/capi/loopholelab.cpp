#include "loopholelab.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "core/analytic.hpp"
#include "core/config.hpp"
#include "core/engine.hpp"
#include "core/estimators.hpp"
#include "core/oracle.hpp"

// The C boundary: translate exceptions into status codes and keep the message
// around per thread.  No exception may escape an extern-C function.

namespace {

thread_local std::string g_last_error;

llab_status set_error(llab_status status, const char* what) {
  g_last_error = what != nullptr ? what : "unknown error";
  return status;
}

template <typename Fn>
llab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const llab::ConfigError& e) {
    return set_error(LLAB_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(LLAB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return set_error(LLAB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(LLAB_ERR_INTERNAL, "unknown exception");
  }
}

llab_status require(bool ok, const char* what) {
  if (ok) return LLAB_OK;
  throw std::invalid_argument(what);
}

llab_counts to_c(const llab::RealCounts& t) {
  llab_counts c;
  c.nn = t.nn;
  c.ss = t.ss;
  c.ns = t.ns;
  c.sn = t.sn;
  c.a_only_n = t.a_only_n;
  c.a_only_s = t.a_only_s;
  c.b_only_n = t.b_only_n;
  c.b_only_s = t.b_only_s;
  c.neither = t.neither;
  c.invalid = t.invalid;
  c.emitted = t.emitted;
  return c;
}

llab::RealCounts from_c(const llab_counts& c) {
  llab::RealCounts t;
  t.nn = c.nn;
  t.ss = c.ss;
  t.ns = c.ns;
  t.sn = c.sn;
  t.a_only_n = c.a_only_n;
  t.a_only_s = c.a_only_s;
  t.b_only_n = c.b_only_n;
  t.b_only_s = c.b_only_s;
  t.neither = c.neither;
  t.invalid = c.invalid;
  t.emitted = c.emitted;
  return t;
}

llab_estimate to_c(const llab::Estimate& e) {
  llab_estimate out;
  out.value = e.value;
  out.defined = e.defined ? 1 : 0;
  out.standard_error = e.standard_error;
  out.denominator = e.kind == llab::Denominator::EmittedPairs ? LLAB_DENOM_EMITTED_PAIRS
                                                              : LLAB_DENOM_OBSERVED_COINCIDENCES;
  out.coincidence_total = e.coincidence_total;
  return out;
}

llab::Denominator from_c(llab_denominator d) {
  switch (d) {
    case LLAB_DENOM_OBSERVED_COINCIDENCES:
      return llab::Denominator::ObservedCoincidences;
    case LLAB_DENOM_EMITTED_PAIRS:
      return llab::Denominator::EmittedPairs;
  }
  throw std::invalid_argument("unknown denominator kind");
}

llab::ScanResult scan_from_entries(const llab_scan_entry* entries, size_t n) {
  // Estimator-side consumers only need settings and counts; rebuild integer
  // tables, rejecting fractional cells (scans are raw tallies by contract).
  llab::ScanResult scan;
  scan.entries.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const llab_counts& c = entries[i].counts;
    llab::ScanEntry e;
    e.setting_a = entries[i].setting_a;
    e.setting_b = entries[i].setting_b;
    const double* cells[] = {&c.nn,       &c.ss,       &c.ns,      &c.sn,
                             &c.a_only_n, &c.a_only_s, &c.b_only_n, &c.b_only_s,
                             &c.neither,  &c.invalid,  &c.emitted};
    std::uint64_t* slots[] = {&e.counts.nn,       &e.counts.ss,       &e.counts.ns,
                              &e.counts.sn,       &e.counts.a_only_n, &e.counts.a_only_s,
                              &e.counts.b_only_n, &e.counts.b_only_s, &e.counts.neither,
                              &e.counts.invalid,  &e.counts.emitted};
    for (int k = 0; k < 11; ++k) {
      const double v = *cells[k];
      if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v)))
        throw std::invalid_argument("scan entries must hold whole non-negative counts");
      *slots[k] = static_cast<std::uint64_t>(v);
    }
    scan.entries.push_back(e);
  }
  return scan;
}

}  // namespace

struct llab_experiment {
  llab::ExperimentConfig config;
};

extern "C" {

const char* llab_version(void) { return "0.1.0"; }

const char* llab_last_error(void) { return g_last_error.c_str(); }

llab_status llab_cap_overlap(double alpha, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    const double v = llab::analytic::cap_overlap_fraction(alpha, beta);
    *out = v;
    return LLAB_OK;
  });
}

llab_status llab_p_like(double phi, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = llab::analytic::p_like(phi, beta);
    return LLAB_OK;
  });
}

llab_status llab_p_unlike(double phi, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = llab::analytic::p_unlike(phi, beta);
    return LLAB_OK;
  });
}

llab_status llab_total_rate(double phi, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = llab::analytic::total_rate(phi, beta);
    return LLAB_OK;
  });
}

llab_status llab_correlation_normalised(double phi, double beta, double* out, int* out_defined) {
  return guarded([&] {
    require(out != nullptr && out_defined != nullptr, "out is null");
    const llab::analytic::Correlation c = llab::analytic::correlation_normalised(phi, beta);
    *out_defined = c.defined ? 1 : 0;
    if (c.defined) *out = c.value;
    return LLAB_OK;
  });
}

llab_status llab_correlation_unnormalised(double phi, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = llab::analytic::correlation_unnormalised(phi, beta);
    return LLAB_OK;
  });
}

llab_status llab_chsh_analytic(double beta, int identical_spins, double a, double a_prime,
                               double b, double b_prime, llab_denominator denominator,
                               double* out, int* out_defined) {
  return guarded([&] {
    require(out != nullptr && out_defined != nullptr, "out is null");
    llab::analytic::BallParams params;
    params.beta = beta;
    params.identical_spins = identical_spins != 0;
    const auto kind = from_c(denominator) == llab::Denominator::ObservedCoincidences
                          ? llab::analytic::CorrelationKind::Normalised
                          : llab::analytic::CorrelationKind::Unnormalised;
    const llab::analytic::ChshValue s =
        llab::analytic::chsh_analytic(params, a, a_prime, b, b_prime, kind);
    *out_defined = s.defined ? 1 : 0;
    if (s.defined) *out = s.value;
    return LLAB_OK;
  });
}

double llab_qm_coincidence(double phi) { return llab::analytic::qm_coincidence(phi); }

double llab_qm_correlation(double phi) { return llab::analytic::qm_correlation(phi); }

llab_status llab_experiment_from_json(const char* json_text, llab_experiment** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "json_text or out is null");
    auto* exp = new llab_experiment{llab::parse_experiment_config(json_text)};
    *out = exp;
    return LLAB_OK;
  });
}

void llab_experiment_free(llab_experiment* experiment) { delete experiment; }

llab_status llab_experiment_info(const llab_experiment* experiment, uint64_t* out_seed,
                                 uint64_t* out_n_pairs) {
  return guarded([&] {
    require(experiment != nullptr, "experiment is null");
    if (out_seed != nullptr) *out_seed = experiment->config.seed;
    if (out_n_pairs != nullptr) *out_n_pairs = experiment->config.n_pairs;
    return LLAB_OK;
  });
}

llab_status llab_experiment_to_json(const llab_experiment* experiment, char* buf,
                                    size_t* inout_size) {
  return guarded([&] {
    require(experiment != nullptr && inout_size != nullptr, "experiment or size is null");
    const std::string text = llab::experiment_config_to_json(experiment->config);
    const size_t needed = text.size() + 1;
    const size_t capacity = *inout_size;
    *inout_size = needed;
    require(buf != nullptr && capacity >= needed, "buffer too small");
    std::memcpy(buf, text.c_str(), needed);
    return LLAB_OK;
  });
}

llab_status llab_run_pair(const llab_experiment* experiment, uint64_t substream, double setting_a,
                          double setting_b, llab_counts* out) {
  return guarded([&] {
    require(experiment != nullptr && out != nullptr, "experiment or out is null");
    *out = to_c(llab::run_pair(experiment->config, setting_a, setting_b, substream));
    return LLAB_OK;
  });
}

llab_status llab_run_scan(const llab_experiment* experiment, const double* phis, size_t n_phis,
                          double fixed_a, llab_scan_entry* out_entries) {
  return guarded([&] {
    require(experiment != nullptr, "experiment is null");
    require(n_phis == 0 || (phis != nullptr && out_entries != nullptr),
            "phis or out is null");
    const llab::ScanResult scan =
        llab::run_scan(experiment->config, {phis, n_phis}, fixed_a);
    for (size_t i = 0; i < scan.entries.size(); ++i) {
      out_entries[i].setting_a = scan.entries[i].setting_a;
      out_entries[i].setting_b = scan.entries[i].setting_b;
      out_entries[i].counts = to_c(scan.entries[i].counts);
    }
    return LLAB_OK;
  });
}

llab_status llab_run_grid_ab(const llab_experiment* experiment, const double* a_grid, size_t n_a,
                             const double* b_grid, size_t n_b, llab_scan_entry* out_entries) {
  return guarded([&] {
    require(experiment != nullptr, "experiment is null");
    require((n_a == 0 || a_grid != nullptr) && (n_b == 0 || b_grid != nullptr) &&
                (n_a * n_b == 0 || out_entries != nullptr),
            "grids or out is null");
    const llab::ScanResult scan =
        llab::run_grid_ab(experiment->config, {a_grid, n_a}, {b_grid, n_b});
    for (size_t i = 0; i < scan.entries.size(); ++i) {
      out_entries[i].setting_a = scan.entries[i].setting_a;
      out_entries[i].setting_b = scan.entries[i].setting_b;
      out_entries[i].counts = to_c(scan.entries[i].counts);
    }
    return LLAB_OK;
  });
}

llab_status llab_run_chsh(const llab_experiment* experiment, double a, double a_prime, double b,
                          double b_prime, llab_counts out_tables[4]) {
  return guarded([&] {
    require(experiment != nullptr && out_tables != nullptr, "experiment or out is null");
    const auto tables = llab::run_chsh(experiment->config, a, a_prime, b, b_prime);
    for (int i = 0; i < 4; ++i) out_tables[i] = to_c(tables[i]);
    return LLAB_OK;
  });
}

llab_status llab_estimate_e(const llab_counts* table, llab_denominator denominator,
                            llab_estimate* out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "table or out is null");
    *out = to_c(llab::estimate_e(from_c(*table), from_c(denominator)));
    return LLAB_OK;
  });
}

llab_status llab_chsh(const llab_counts tables[4], llab_denominator denominator,
                      llab_bell_report* out) {
  return guarded([&] {
    require(tables != nullptr && out != nullptr, "tables or out is null");
    const std::array<llab::RealCounts, 4> cpp = {from_c(tables[0]), from_c(tables[1]),
                                                 from_c(tables[2]), from_c(tables[3])};
    const llab::BellReport r = llab::chsh(cpp, from_c(denominator));
    llab_bell_report c;
    for (int i = 0; i < 4; ++i) c.terms[i] = to_c(r.terms[i]);
    c.s_value = r.s_value;
    c.defined = r.defined ? 1 : 0;
    c.standard_error = r.standard_error;
    c.violates_classical = r.violates_classical ? 1 : 0;
    c.exceeds_qm = r.exceeds_qm ? 1 : 0;
    *out = c;
    return LLAB_OK;
  });
}

llab_status llab_subtract_accidentals(const llab_counts* table, llab_counts* out_adjusted,
                                      llab_subtraction_info* info) {
  return guarded([&] {
    require(table != nullptr && out_adjusted != nullptr, "table or out is null");
    const llab::SubtractionResult r = llab::subtract_accidentals(from_c(*table));
    *out_adjusted = to_c(r.adjusted);
    if (info != nullptr) {
      info->clipped_cells = r.clipped_cells;
      info->clipped_mass = r.clipped_mass;
    }
    return LLAB_OK;
  });
}

llab_status llab_visibility(const llab_scan_entry* entries, size_t n_entries, double* out) {
  return guarded([&] {
    require(entries != nullptr && out != nullptr, "entries or out is null");
    *out = llab::visibility(scan_from_entries(entries, n_entries));
    return LLAB_OK;
  });
}

llab_status llab_freedman_delta(double rate_narrow, double rate_wide, double rate_removed,
                                double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = llab::freedman_delta(rate_narrow, rate_wide, rate_removed);
    return LLAB_OK;
  });
}

llab_status llab_fair_sampling_diagnostics(const llab_scan_entry* entries, size_t n_entries,
                                           llab_diagnostics_report* out) {
  return guarded([&] {
    require(entries != nullptr && out != nullptr, "entries or out is null");
    const llab::DiagnosticsReport r = llab::fair_sampling_diagnostics(scan_from_entries(entries, n_entries));
    out->total_rate_max_relative_variation = r.total_rate_max_relative_variation;
    out->bell_angle_totals_gap = r.bell_angle_totals_gap;
    out->rotational_invariance_max_z = r.rotational_invariance_max_z;
    out->ns_sn_asymmetry_z = r.ns_sn_asymmetry_z;
    return LLAB_OK;
  });
}

llab_status llab_oracle_cap_overlap_quad(double alpha, double beta, int polar_steps,
                                         int azimuth_steps, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    llab::oracle::QuadratureSpec spec;
    spec.polar_steps = polar_steps;
    spec.azimuth_steps = azimuth_steps;
    *out = llab::oracle::cap_overlap_quad(alpha, beta, spec);
    return LLAB_OK;
  });
}

llab_status llab_oracle_cap_overlap_mc(double alpha, double beta, uint64_t n_samples,
                                       uint64_t seed, double* out_value,
                                       double* out_standard_error) {
  return guarded([&] {
    require(out_value != nullptr && out_standard_error != nullptr, "out is null");
    const llab::oracle::McEstimate e = llab::oracle::cap_overlap_mc(alpha, beta, n_samples, seed);
    *out_value = e.value;
    *out_standard_error = e.standard_error;
    return LLAB_OK;
  });
}

}  // extern "C"
