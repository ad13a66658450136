// Command line front end for the loophole-lab shared library.
//
// Subcommands: predict (closed-form curves), simulate (one counts table),
// test (CHSH run and report), scan (counts over a separation grid, optional
// fair-sampling diagnostics), oracle (closed form vs quadrature vs Monte
// Carlo spot check).  Angles on the command line are degrees; CSV output
// carries a comment-line manifest, JSON output a "manifest" object.
//
// Exit codes: 0 success, 2 bad arguments or bad config, 3 internal failure.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopholelab.h"

namespace {

using nlohmann::json;

constexpr double kDegPi = 180.0;

double deg2rad(double deg) { return deg * 3.14159265358979323846 / kDegPi; }

struct CliError {
  int exit_code;
  std::string message;
};

void check(llab_status st) {
  if (st == LLAB_OK) return;
  const int code = st == LLAB_ERR_INTERNAL ? 3 : 2;
  throw CliError{code, llab_last_error()};
}

// Locale-free number formatting, 9 significant digits.
std::string fmt9(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  const auto res = std::to_chars(buf, buf + sizeof(buf), h, 16);
  std::string hex(buf, res.ptr);
  return std::string(16 - hex.size(), '0') + hex;
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::string timestamp = iso_timestamp_utc();
};

json manifest_json(const Manifest& m) {
  json j;
  j["toolVersion"] = llab_version();
  j["command"] = m.command;
  j["configDigest"] = m.config_digest;
  if (m.seed)
    j["seed"] = *m.seed;
  else
    j["seed"] = nullptr;
  j["timestamp"] = m.timestamp;
  return j;
}

void manifest_comments(std::ostream& os, const Manifest& m) {
  os << "# tool_version: " << llab_version() << "\n";
  os << "# command: " << m.command << "\n";
  os << "# config_digest: " << m.config_digest << "\n";
  if (m.seed) os << "# seed: " << *m.seed << "\n";
  os << "# timestamp: " << m.timestamp << "\n";
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{2, "cannot open output file: " + path};
  out << content;
  if (!out) throw CliError{3, "failed writing output file: " + path};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, "cannot read config file: " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Owning wrapper so error paths cannot leak the handle.
struct Experiment {
  llab_experiment* handle = nullptr;
  std::string digest;
  std::uint64_t seed = 0;

  explicit Experiment(const std::string& config_path) {
    const std::string text = read_file(config_path);
    digest = fnv1a_hex(text);
    check(llab_experiment_from_json(text.c_str(), &handle));
    std::uint64_t n_pairs = 0;
    check(llab_experiment_info(handle, &seed, &n_pairs));
  }
  ~Experiment() { llab_experiment_free(handle); }
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;
};

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw CliError{2, "grid needs at least 2 points and max > min"};
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

json estimate_json(const llab_estimate& e) {
  json j;
  j["value"] = e.defined ? json(e.value) : json(nullptr);
  j["standardError"] = e.standard_error;
  j["coincidences"] = e.coincidence_total;
  return j;
}

json counts_json(const llab_counts& c) {
  return {{"nn", c.nn},
          {"ss", c.ss},
          {"ns", c.ns},
          {"sn", c.sn},
          {"aOnlyN", c.a_only_n},
          {"aOnlyS", c.a_only_s},
          {"bOnlyN", c.b_only_n},
          {"bOnlyS", c.b_only_s},
          {"neither", c.neither},
          {"invalid", c.invalid},
          {"emitted", c.emitted}};
}

json bell_report_json(const llab_bell_report& r, const double angles_deg[4]) {
  // Term i pairs setting A angles_deg[i < 2 ? 0 : 1] with B angles_deg[...].
  static constexpr int a_index[4] = {0, 0, 1, 1};
  static constexpr int b_index[4] = {2, 3, 2, 3};
  json terms = json::array();
  for (int i = 0; i < 4; ++i) {
    json t;
    t["settingADeg"] = angles_deg[a_index[i]];
    t["settingBDeg"] = angles_deg[b_index[i]];
    t["value"] = r.terms[i].defined ? json(r.terms[i].value) : json(nullptr);
    t["standardError"] = r.terms[i].standard_error;
    t["coincidences"] = r.terms[i].coincidence_total;
    terms.push_back(t);
  }
  json j;
  j["sValue"] = r.defined ? json(r.s_value) : json(nullptr);
  j["standardError"] = r.standard_error;
  j["violatesClassical"] = r.violates_classical != 0;
  j["exceedsQm"] = r.exceeds_qm != 0;
  j["terms"] = terms;
  return j;
}

// ---- predict -----------------------------------------------------------

int cmd_predict(double beta_deg, double phi_min, double phi_max, int phi_points,
                bool opposite_spins, const std::string& out_path) {
  Manifest m;
  m.command = "predict";
  std::ostringstream params;
  params << "predict beta=" << beta_deg << " phi=[" << phi_min << "," << phi_max << ","
         << phi_points << "] oppositeSpins=" << opposite_spins;
  m.config_digest = fnv1a_hex(params.str());

  const double beta = deg2rad(beta_deg);
  std::ostringstream os;
  manifest_comments(os, m);
  os << "phi_deg,p_ss,p_ns,total_rate,e_normalised,e_unnormalised,qm_coincidence,qm_correlation\n";
  for (const double phi_deg : linspace(phi_min, phi_max, phi_points)) {
    const double phi = deg2rad(phi_deg);
    // Opposite spins swap side B's channels: every separation behaves like its
    // supplement.  QM reference columns always use the raw separation.
    const double phi_eff = opposite_spins ? deg2rad(kDegPi) - phi : phi;
    double p_ss = 0, p_ns = 0, total = 0, e_unnorm = 0, e_norm = 0;
    int defined = 0;
    check(llab_p_like(phi_eff, beta, &p_ss));
    check(llab_p_unlike(phi_eff, beta, &p_ns));
    check(llab_total_rate(phi_eff, beta, &total));
    check(llab_correlation_unnormalised(phi_eff, beta, &e_unnorm));
    check(llab_correlation_normalised(phi_eff, beta, &e_norm, &defined));
    os << fmt9(phi_deg) << ',' << fmt9(p_ss) << ',' << fmt9(p_ns) << ',' << fmt9(total) << ',';
    if (defined) os << fmt9(e_norm);
    os << ',' << fmt9(e_unnorm) << ',' << fmt9(llab_qm_coincidence(phi)) << ','
       << fmt9(llab_qm_correlation(phi)) << "\n";
  }
  write_output(out_path, os.str());
  return 0;
}

// ---- simulate ----------------------------------------------------------

int cmd_simulate(const std::string& config_path, double setting_a_deg, double setting_b_deg,
                 std::uint64_t substream, const std::string& out_path) {
  Experiment exp(config_path);
  Manifest m;
  m.command = "simulate";
  m.config_digest = exp.digest;
  m.seed = exp.seed;

  llab_counts counts;
  check(llab_run_pair(exp.handle, substream, deg2rad(setting_a_deg), deg2rad(setting_b_deg),
                      &counts));
  llab_estimate observed, emitted;
  check(llab_estimate_e(&counts, LLAB_DENOM_OBSERVED_COINCIDENCES, &observed));
  check(llab_estimate_e(&counts, LLAB_DENOM_EMITTED_PAIRS, &emitted));

  json j;
  j["manifest"] = manifest_json(m);
  j["settingADeg"] = setting_a_deg;
  j["settingBDeg"] = setting_b_deg;
  j["substream"] = substream;
  j["counts"] = counts_json(counts);
  j["correlation"] = {{"observed", estimate_json(observed)}, {"emitted", estimate_json(emitted)}};
  write_output(out_path, j.dump(2) + "\n");
  return 0;
}

// ---- test --------------------------------------------------------------

int cmd_test(const std::string& config_path, const std::vector<double>& angles_deg,
             bool subtract, const std::string& out_path) {
  if (angles_deg.size() != 4) throw CliError{2, "--angles needs exactly a,aPrime,b,bPrime"};
  Experiment exp(config_path);
  Manifest m;
  m.command = "test";
  m.config_digest = exp.digest;
  m.seed = exp.seed;

  llab_counts tables[4];
  check(llab_run_chsh(exp.handle, deg2rad(angles_deg[0]), deg2rad(angles_deg[1]),
                      deg2rad(angles_deg[2]), deg2rad(angles_deg[3]), tables));

  llab_bell_report observed, emitted;
  check(llab_chsh(tables, LLAB_DENOM_OBSERVED_COINCIDENCES, &observed));
  check(llab_chsh(tables, LLAB_DENOM_EMITTED_PAIRS, &emitted));

  const double angles[4] = {angles_deg[0], angles_deg[1], angles_deg[2], angles_deg[3]};
  json j;
  j["manifest"] = manifest_json(m);
  j["anglesDeg"] = angles_deg;
  j["observed"] = bell_report_json(observed, angles);
  j["emitted"] = bell_report_json(emitted, angles);
  if (subtract) {
    llab_counts adjusted[4];
    int clipped_cells = 0;
    double clipped_mass = 0.0;
    for (int i = 0; i < 4; ++i) {
      llab_subtraction_info info;
      check(llab_subtract_accidentals(&tables[i], &adjusted[i], &info));
      clipped_cells += info.clipped_cells;
      clipped_mass += info.clipped_mass;
    }
    llab_bell_report adj;
    check(llab_chsh(adjusted, LLAB_DENOM_OBSERVED_COINCIDENCES, &adj));
    j["accidentalSubtracted"] = bell_report_json(adj, angles);
    j["accidentalSubtracted"]["clippedCells"] = clipped_cells;
    j["accidentalSubtracted"]["clippedMass"] = clipped_mass;
  }
  write_output(out_path, j.dump(2) + "\n");
  return 0;
}

// ---- scan --------------------------------------------------------------

int cmd_scan(const std::string& config_path, std::vector<double> phi_grid_deg, double phi_min,
             double phi_max, int phi_points, double fixed_a_deg, const std::string& out_path,
             const std::string& diagnostics_path) {
  if (phi_grid_deg.empty()) phi_grid_deg = linspace(phi_min, phi_max, phi_points);
  Experiment exp(config_path);
  Manifest m;
  m.command = "scan";
  m.config_digest = exp.digest;
  m.seed = exp.seed;

  std::vector<double> phis(phi_grid_deg.size());
  for (std::size_t i = 0; i < phis.size(); ++i) phis[i] = deg2rad(phi_grid_deg[i]);
  std::vector<llab_scan_entry> entries(phis.size());
  check(llab_run_scan(exp.handle, phis.data(), phis.size(), deg2rad(fixed_a_deg),
                      entries.data()));

  std::ostringstream os;
  manifest_comments(os, m);
  os << "phi_deg,setting_a_deg,setting_b_deg,nn,ss,ns,sn,a_only_n,a_only_s,b_only_n,b_only_s,"
        "neither,invalid,emitted,like_rate,unlike_rate,total_rate,e_observed,e_emitted\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const llab_counts& c = entries[i].counts;
    llab_estimate observed, emitted;
    check(llab_estimate_e(&c, LLAB_DENOM_OBSERVED_COINCIDENCES, &observed));
    check(llab_estimate_e(&c, LLAB_DENOM_EMITTED_PAIRS, &emitted));
    const double like = c.nn + c.ss;
    const double unlike = c.ns + c.sn;
    os << fmt9(phi_grid_deg[i]) << ',' << fmt9(fixed_a_deg) << ','
       << fmt9(fixed_a_deg + phi_grid_deg[i]) << ',' << fmt9(c.nn) << ',' << fmt9(c.ss) << ','
       << fmt9(c.ns) << ',' << fmt9(c.sn) << ',' << fmt9(c.a_only_n) << ',' << fmt9(c.a_only_s)
       << ',' << fmt9(c.b_only_n) << ',' << fmt9(c.b_only_s) << ',' << fmt9(c.neither) << ','
       << fmt9(c.invalid) << ',' << fmt9(c.emitted) << ',' << fmt9(like / c.emitted) << ','
       << fmt9(unlike / c.emitted) << ',' << fmt9((like + unlike) / c.emitted) << ',';
    if (observed.defined) os << fmt9(observed.value);
    os << ',' << fmt9(emitted.value) << "\n";
  }
  write_output(out_path, os.str());

  if (!diagnostics_path.empty()) {
    llab_diagnostics_report rep;
    check(llab_fair_sampling_diagnostics(entries.data(), entries.size(), &rep));
    json j;
    j["manifest"] = manifest_json(m);
    j["totalRateMaxRelativeVariation"] = rep.total_rate_max_relative_variation;
    j["bellAngleTotalsGap"] = rep.bell_angle_totals_gap;
    j["rotationalInvarianceMaxZ"] = rep.rotational_invariance_max_z;
    j["nsSnAsymmetryZ"] = rep.ns_sn_asymmetry_z;
    write_output(diagnostics_path, j.dump(2) + "\n");
  }
  return 0;
}

// ---- oracle ------------------------------------------------------------

int cmd_oracle(double alpha_deg, double beta_deg, int polar_steps, int azimuth_steps,
               std::uint64_t mc_samples, std::uint64_t seed, const std::string& out_path) {
  Manifest m;
  m.command = "oracle";
  std::ostringstream params;
  params << "oracle alpha=" << alpha_deg << " beta=" << beta_deg << " quad=" << polar_steps << "x"
         << azimuth_steps << " mc=" << mc_samples;
  m.config_digest = fnv1a_hex(params.str());
  if (mc_samples > 0) m.seed = seed;

  const double alpha = deg2rad(alpha_deg);
  const double beta = deg2rad(beta_deg);
  double closed = 0, quad = 0;
  check(llab_cap_overlap(alpha, beta, &closed));
  check(llab_oracle_cap_overlap_quad(alpha, beta, polar_steps, azimuth_steps, &quad));

  std::ostringstream os;
  manifest_comments(os, m);
  os << "alpha_deg,beta_deg,closed_form,quadrature,quad_abs_delta,mc_value,mc_standard_error,"
        "mc_abs_delta\n";
  os << fmt9(alpha_deg) << ',' << fmt9(beta_deg) << ',' << fmt9(closed) << ',' << fmt9(quad)
     << ',' << fmt9(std::fabs(quad - closed)) << ',';
  if (mc_samples > 0) {
    double mc = 0, se = 0;
    check(llab_oracle_cap_overlap_mc(alpha, beta, mc_samples, seed, &mc, &se));
    os << fmt9(mc) << ',' << fmt9(se) << ',' << fmt9(std::fabs(mc - closed));
  } else {
    os << ",,";
  }
  os << "\n";
  write_output(out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local hidden-variable Bell test simulator and calculator"};
  app.require_subcommand(1);

  // predict
  auto* predict = app.add_subcommand("predict", "Closed-form curves over a separation grid");
  double p_beta = 0;
  double p_phi_min = 0, p_phi_max = 180;
  int p_phi_points = 181;
  bool p_opposite = false;
  std::string p_out;
  predict->add_option("--beta", p_beta, "Cap half-angle in degrees, (0, 90]")->required();
  predict->add_option("--phi-min", p_phi_min, "First separation in degrees");
  predict->add_option("--phi-max", p_phi_max, "Last separation in degrees");
  predict->add_option("--phi-points", p_phi_points, "Number of grid points");
  predict->add_flag("--opposite-spins", p_opposite, "Side B carries the antipodal mark");
  predict->add_option("--out", p_out, "Output CSV file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one sub-experiment at fixed settings");
  std::string s_config, s_out;
  double s_a = 0, s_b = 0;
  std::uint64_t s_substream = 0;
  simulate->add_option("--config", s_config, "Experiment config JSON")->required();
  simulate->add_option("--setting-a", s_a, "Side A setting in degrees")->required();
  simulate->add_option("--setting-b", s_b, "Side B setting in degrees")->required();
  simulate->add_option("--substream", s_substream, "Random substream of this sub-experiment");
  simulate->add_option("--out", s_out, "Output JSON file (default stdout)");

  // test
  auto* test = app.add_subcommand("test", "CHSH run at four settings");
  std::string t_config, t_out;
  std::vector<double> t_angles = {0, 90, 45, 135};
  bool t_subtract = false;
  test->add_option("--config", t_config, "Experiment config JSON")->required();
  test->add_option("--angles", t_angles, "a,aPrime,b,bPrime in degrees")
      ->delimiter(',')
      ->expected(4);
  test->add_flag("--subtract-accidentals", t_subtract,
                 "Also report the accidental-subtracted observed-denominator S");
  test->add_option("--out", t_out, "Output JSON file (default stdout)");

  // scan
  auto* scan = app.add_subcommand("scan", "Counts over a separation grid");
  std::string c_config, c_out, c_diag;
  std::vector<double> c_grid;
  double c_phi_min = 0, c_phi_max = 180, c_fixed_a = 0;
  int c_phi_points = 13;
  scan->add_option("--config", c_config, "Experiment config JSON")->required();
  scan->add_option("--phi-grid", c_grid, "Explicit separations in degrees")->delimiter(',');
  scan->add_option("--phi-min", c_phi_min, "First separation in degrees");
  scan->add_option("--phi-max", c_phi_max, "Last separation in degrees");
  scan->add_option("--phi-points", c_phi_points, "Number of grid points");
  scan->add_option("--fixed-a", c_fixed_a, "Side A setting in degrees");
  scan->add_option("--diagnostics", c_diag, "Also write fair-sampling diagnostics JSON here");
  scan->add_option("--out", c_out, "Output CSV file (default stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Cross-check the cap overlap closed form");
  double o_alpha = 0, o_beta = 0;
  int o_polar = 2000, o_azimuth = 4000;
  std::uint64_t o_mc = 0, o_seed = 1;
  std::string o_out;
  oracle->add_option("--alpha", o_alpha, "Half the axis separation, degrees")->required();
  oracle->add_option("--beta", o_beta, "Cap half-angle in degrees, (0, 90]")->required();
  oracle->add_option("--polar-steps", o_polar, "Quadrature steps in cos(polar)");
  oracle->add_option("--azimuth-steps", o_azimuth, "Quadrature steps in azimuth");
  oracle->add_option("--mc-samples", o_mc, "Monte Carlo samples (0 skips the MC column)");
  oracle->add_option("--seed", o_seed, "Monte Carlo seed");
  oracle->add_option("--out", o_out, "Output CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (predict->parsed())
      return cmd_predict(p_beta, p_phi_min, p_phi_max, p_phi_points, p_opposite, p_out);
    if (simulate->parsed()) return cmd_simulate(s_config, s_a, s_b, s_substream, s_out);
    if (test->parsed()) return cmd_test(t_config, t_angles, t_subtract, t_out);
    if (scan->parsed())
      return cmd_scan(c_config, c_grid, c_phi_min, c_phi_max, c_phi_points, c_fixed_a, c_out,
                      c_diag);
    if (oracle->parsed())
      return cmd_oracle(o_alpha, o_beta, o_polar, o_azimuth, o_mc, o_seed, o_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
