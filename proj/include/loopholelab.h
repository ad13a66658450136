/* loophole-lab public C API.
 *
 * Thin extern-C surface over the simulator and the closed-form calculator.
 * All angles are radians.  Functions return llab_status; on failure the
 * thread-local message from llab_last_error() describes what went wrong and
 * output parameters are left untouched.  Correlations that have no defined
 * value (no coincidences to normalise by) are reported through an explicit
 * `defined` flag, never as NaN.
 */

#ifndef LOOPHOLELAB_H
#define LOOPHOLELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LLAB_BUILD_SHARED)
#define LLAB_API __declspec(dllexport)
#else
#define LLAB_API __declspec(dllimport)
#endif
#else
#define LLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum llab_status {
  LLAB_OK = 0,
  LLAB_ERR_INVALID_ARGUMENT = 1, /* bad parameter or null pointer */
  LLAB_ERR_CONFIG = 2,           /* configuration text rejected */
  LLAB_ERR_INTERNAL = 3          /* unexpected failure inside the library */
} llab_status;

/* Denominator used when turning counts into a correlation. */
typedef enum llab_denominator {
  LLAB_DENOM_OBSERVED_COINCIDENCES = 0,
  LLAB_DENOM_EMITTED_PAIRS = 1
} llab_denominator;

typedef enum llab_channel { LLAB_CHANNEL_N = 0, LLAB_CHANNEL_S = 1 } llab_channel;

/* Tally of one sub-experiment.  Cells are whole counts stored as doubles so
 * the same struct carries background-subtracted (fractional) tables. */
typedef struct llab_counts {
  double nn, ss, ns, sn;
  double a_only_n, a_only_s;
  double b_only_n, b_only_s;
  double neither;
  double invalid;
  double emitted;
} llab_counts;

typedef struct llab_scan_entry {
  double setting_a;
  double setting_b;
  llab_counts counts;
} llab_scan_entry;

typedef struct llab_estimate {
  double value;
  int defined; /* 0: no coincidences under the observed denominator */
  double standard_error;
  int denominator; /* llab_denominator */
  double coincidence_total;
} llab_estimate;

typedef struct llab_bell_report {
  llab_estimate terms[4]; /* E(a,b), E(a,b'), E(a',b), E(a',b') */
  double s_value;
  int defined;
  double standard_error;
  int violates_classical; /* |S| > 2 */
  int exceeds_qm;         /* |S| > 2*sqrt(2) */
} llab_bell_report;

typedef struct llab_subtraction_info {
  int clipped_cells;
  double clipped_mass;
} llab_subtraction_info;

typedef struct llab_diagnostics_report {
  double total_rate_max_relative_variation;
  double bell_angle_totals_gap;
  double rotational_invariance_max_z;
  double ns_sn_asymmetry_z;
} llab_diagnostics_report;

LLAB_API const char* llab_version(void);

/* Message for the most recent failing call on this thread; empty string when
 * nothing failed yet.  The pointer stays valid until the next failing call. */
LLAB_API const char* llab_last_error(void);

/* ---- closed forms ------------------------------------------------------ */

/* Overlap fraction of two detection caps of half-angle beta whose axes are
 * 2*alpha apart.  alpha in [0, pi/2], beta in (0, pi/2]. */
LLAB_API llab_status llab_cap_overlap(double alpha, double beta, double* out);

/* Like / unlike coincidence probability (one channel pair each) and the total
 * over all four channel pairs, at analyser separation phi in [0, pi]. */
LLAB_API llab_status llab_p_like(double phi, double beta, double* out);
LLAB_API llab_status llab_p_unlike(double phi, double beta, double* out);
LLAB_API llab_status llab_total_rate(double phi, double beta, double* out);

/* E(phi) over observed coincidences; *out_defined is 0 when no coincidences
 * are possible at this separation (in which case *out is untouched). */
LLAB_API llab_status llab_correlation_normalised(double phi, double beta, double* out,
                                                 int* out_defined);

/* E(phi) over emitted pairs; always defined. */
LLAB_API llab_status llab_correlation_unnormalised(double phi, double beta, double* out);

/* S = E(a,b) - E(a,b') + E(a',b) + E(a',b') from the closed forms.
 * identical_spins = 0 swaps side B's channels (phi -> pi - phi).
 * denominator selects observed-coincidence or emitted-pair correlations. */
LLAB_API llab_status llab_chsh_analytic(double beta, int identical_spins, double a, double a_prime,
                                        double b, double b_prime, llab_denominator denominator,
                                        double* out, int* out_defined);

/* Quantum references: like-coincidence probability cos^2(phi/2)/2 per channel
 * pair, and correlation cos(phi). */
LLAB_API double llab_qm_coincidence(double phi);
LLAB_API double llab_qm_correlation(double phi);

/* ---- simulation -------------------------------------------------------- */

typedef struct llab_experiment llab_experiment;

/* Build an experiment from JSON text (schemaVersion 1; see the shipped
 * example config).  On success the caller owns the handle and releases it
 * with llab_experiment_free. */
LLAB_API llab_status llab_experiment_from_json(const char* json_text, llab_experiment** out);
LLAB_API void llab_experiment_free(llab_experiment* experiment);

LLAB_API llab_status llab_experiment_info(const llab_experiment* experiment, uint64_t* out_seed,
                                          uint64_t* out_n_pairs);

/* Echo the effective configuration (defaults filled in) as JSON into buf.
 * *inout_size carries the buffer capacity in and the required size (including
 * the terminator) out; LLAB_ERR_INVALID_ARGUMENT when the buffer is too
 * small. */
LLAB_API llab_status llab_experiment_to_json(const llab_experiment* experiment, char* buf,
                                             size_t* inout_size);

/* Run nPairs events at fixed settings.  `substream` keys the random stream of
 * this sub-experiment: equal (seed, substream) reproduces the table exactly,
 * independent of thread count. */
LLAB_API llab_status llab_run_pair(const llab_experiment* experiment, uint64_t substream,
                                   double setting_a, double setting_b, llab_counts* out);

/* One sub-experiment per separation (strictly increasing phis), substream i,
 * side A fixed at fixed_a.  out_entries must hold n_phis entries. */
LLAB_API llab_status llab_run_scan(const llab_experiment* experiment, const double* phis,
                                   size_t n_phis, double fixed_a, llab_scan_entry* out_entries);

/* Cartesian product of the two setting grids, row-major in a, substream
 * i * n_b + j.  out_entries must hold n_a * n_b entries. */
LLAB_API llab_status llab_run_grid_ab(const llab_experiment* experiment, const double* a_grid,
                                      size_t n_a, const double* b_grid, size_t n_b,
                                      llab_scan_entry* out_entries);

/* The four CHSH sub-experiments in the order (a,b), (a,b'), (a',b), (a',b'),
 * substreams 0..3. */
LLAB_API llab_status llab_run_chsh(const llab_experiment* experiment, double a, double a_prime,
                                   double b, double b_prime, llab_counts out_tables[4]);

/* ---- estimators -------------------------------------------------------- */

LLAB_API llab_status llab_estimate_e(const llab_counts* table, llab_denominator denominator,
                                     llab_estimate* out);

/* tables in run_chsh order. */
LLAB_API llab_status llab_chsh(const llab_counts tables[4], llab_denominator denominator,
                               llab_bell_report* out);

/* Estimate the uncorrelated background per coincidence cell from the per-side
 * firing totals and subtract it, clipping at zero.  info may be NULL. */
LLAB_API llab_status llab_subtract_accidentals(const llab_counts* table, llab_counts* out_adjusted,
                                               llab_subtraction_info* info);

/* (max - min) / (max + min) of like-coincidence rates over a scan. */
LLAB_API llab_status llab_visibility(const llab_scan_entry* entries, size_t n_entries,
                                     double* out);

/* |rate_narrow - rate_wide| / rate_removed - 1/4 (single-channel consistency;
 * fixed-cap local models keep it <= 0). */
LLAB_API llab_status llab_freedman_delta(double rate_narrow, double rate_wide,
                                         double rate_removed, double* out);

LLAB_API llab_status llab_fair_sampling_diagnostics(const llab_scan_entry* entries,
                                                    size_t n_entries,
                                                    llab_diagnostics_report* out);

/* ---- independent cross-checks ------------------------------------------ */

/* Cap overlap by midpoint product-rule quadrature on (cos polar) x azimuth. */
LLAB_API llab_status llab_oracle_cap_overlap_quad(double alpha, double beta, int polar_steps,
                                                  int azimuth_steps, double* out);

/* Cap overlap by direct Monte Carlo with a binomial error bar. */
LLAB_API llab_status llab_oracle_cap_overlap_mc(double alpha, double beta, uint64_t n_samples,
                                                uint64_t seed, double* out_value,
                                                double* out_standard_error);

#ifdef __cplusplus
}
#endif

#endif /* LOOPHOLELAB_H */
