// End-to-end checks of the command line tool.  Each case spawns the real
// binary (path injected at compile time), captures stdout+stderr, and parses
// the CSV or JSON it emits.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), output};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.push_back("");
  return fields;
}

// Comment lines first, then the header, then data rows.
struct Csv {
  std::vector<std::string> comments;
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      csv.comments.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = line;
    } else {
      csv.rows.push_back(split(line, ','));
    }
  }
  return csv;
}

std::string write_temp_config(const std::string& name, const std::string& text) {
  const std::string path = "cli_test_" + name + ".json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << text;
  out.close();
  return path;
}

const char* kCap75Config = R"({
  "schemaVersion": 1,
  "nPairs": 100000,
  "seed": 20250815,
  "detectorA": {"nCap": {"halfAngleDeg": 75.0}, "sCap": {"halfAngleDeg": 75.0}},
  "detectorB": {"nCap": {"halfAngleDeg": 75.0}, "sCap": {"halfAngleDeg": 75.0}}
})";

const char* kHemisphereConfig = R"({
  "schemaVersion": 1,
  "nPairs": 100000,
  "seed": 31337,
  "detectorA": {"nCap": {"halfAngleDeg": 90.0}, "sCap": {"halfAngleDeg": 90.0}},
  "detectorB": {"nCap": {"halfAngleDeg": 90.0}, "sCap": {"halfAngleDeg": 90.0}}
})";

// Strips lines that legitimately differ between two invocations.
std::string without_timestamps(const std::string& text) {
  std::istringstream ss(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find("timestamp") == std::string::npos) out << line << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("predict emits the documented CSV") {
  const auto r = run_cli("predict --beta 75 --phi-min 0 --phi-max 180 --phi-points 5");
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(r.output);
  CHECK(csv.header ==
        "phi_deg,p_ss,p_ns,total_rate,e_normalised,e_unnormalised,qm_coincidence,qm_correlation");
  REQUIRE(csv.rows.size() == 5);
  REQUIRE(csv.comments.size() >= 4);
  CHECK(csv.comments[0].rfind("# tool_version:", 0) == 0);
  CHECK(r.output.find("nan") == std::string::npos);

  // Row at phi = 45 degrees against the closed forms.
  const auto& row = csv.rows[1];
  REQUIRE(row.size() == 8);
  CHECK(std::stod(row[0]) == doctest::Approx(45.0));
  CHECK(std::stod(row[1]) == doctest::Approx(0.25008764694591301).epsilon(1e-8));
  CHECK(std::stod(row[4]) == doctest::Approx(0.83282102532120455).epsilon(1e-8));
  const double cos_eighth = std::cos(std::atan(1.0) / 2.0);  // cos(pi/8)
  CHECK(std::stod(row[6]) == doctest::Approx(0.5 * cos_eighth * cos_eighth).epsilon(1e-8));
  CHECK(std::stod(row[7]) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
}

TEST_CASE("predict leaves the undefined correlation cell empty") {
  const auto r = run_cli("predict --beta 30 --phi-min 0 --phi-max 180 --phi-points 5");
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.rows.size() == 5);
  const auto& row90 = csv.rows[2];
  REQUIRE(row90.size() == 8);
  CHECK(std::stod(row90[0]) == doctest::Approx(90.0));
  CHECK(std::stod(row90[3]) == doctest::Approx(0.0));  // no coincidences at all
  CHECK(row90[4].empty());                             // e_normalised has no value
  CHECK(row90[5] == "0");                              // e_unnormalised is exactly zero
  CHECK(r.output.find("nan") == std::string::npos);
  CHECK(r.output.find("inf") == std::string::npos);
}

TEST_CASE("predict with opposite spins mirrors the model columns only") {
  const auto plain = run_cli("predict --beta 75 --phi-min 0 --phi-max 180 --phi-points 5");
  const auto flipped =
      run_cli("predict --beta 75 --phi-min 0 --phi-max 180 --phi-points 5 --opposite-spins");
  REQUIRE(plain.exit_code == 0);
  REQUIRE(flipped.exit_code == 0);
  const Csv a = parse_csv(plain.output);
  const Csv b = parse_csv(flipped.output);
  REQUIRE(a.rows.size() == 5);
  REQUIRE(b.rows.size() == 5);
  // Model column at phi equals the plain value at 180 - phi; QM columns track phi.
  CHECK(std::stod(b.rows[1][1]) == doctest::Approx(std::stod(a.rows[3][1])).epsilon(1e-12));
  CHECK(std::stod(b.rows[1][6]) == doctest::Approx(std::stod(a.rows[1][6])).epsilon(1e-12));
}

TEST_CASE("bad arguments exit with code 2") {
  CHECK(run_cli("predict").exit_code == 2);           // --beta missing
  CHECK(run_cli("nonsense").exit_code == 2);          // unknown subcommand
  CHECK(run_cli("").exit_code == 2);                  // subcommand required
  const auto dom = run_cli("predict --beta 120");     // outside (0, 90]
  CHECK(dom.exit_code == 2);
  CHECK(dom.output.find("error:") != std::string::npos);
  const auto grid = run_cli("predict --beta 75 --phi-points 1");
  CHECK(grid.exit_code == 2);
  CHECK(grid.output.find("grid needs") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("predict") != std::string::npos);
  CHECK(r.output.find("oracle") != std::string::npos);
}

TEST_CASE("simulate is reproducible and carries its manifest") {
  const std::string cfg = write_temp_config("simulate", kCap75Config);
  const std::string args = "simulate --config " + cfg + " --setting-a 0 --setting-b 45";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(without_timestamps(first.output) == without_timestamps(second.output));

  const json j = json::parse(first.output);
  CHECK(j["manifest"]["command"] == "simulate");
  CHECK(j["manifest"]["seed"] == 20250815);
  CHECK(j["manifest"]["configDigest"].get<std::string>().size() == 16);
  const std::string ts = j["manifest"]["timestamp"].get<std::string>();
  CHECK(std::regex_match(ts, std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));

  CHECK(j["settingADeg"] == 0.0);
  CHECK(j["settingBDeg"] == 45.0);
  const auto& c = j["counts"];
  const double cells = c["nn"].get<double>() + c["ss"].get<double>() + c["ns"].get<double>() +
                       c["sn"].get<double>() + c["aOnlyN"].get<double>() +
                       c["aOnlyS"].get<double>() + c["bOnlyN"].get<double>() +
                       c["bOnlyS"].get<double>() + c["neither"].get<double>() +
                       c["invalid"].get<double>();
  CHECK(cells == c["emitted"].get<double>());
  CHECK(c["emitted"] == 100000.0);
  CHECK(j["correlation"]["observed"]["value"].is_number());
  CHECK(j["correlation"]["emitted"]["value"].is_number());
}

TEST_CASE("test reports a CHSH value near 2 when every pair is detected") {
  const std::string cfg = write_temp_config("hemisphere", kHemisphereConfig);
  const auto r = run_cli("test --config " + cfg);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.output);
  CHECK(j["anglesDeg"] == json::array({0.0, 90.0, 45.0, 135.0}));
  REQUIRE(j["observed"]["sValue"].is_number());
  const double s_obs = j["observed"]["sValue"].get<double>();
  const double se = j["observed"]["standardError"].get<double>();
  CHECK(std::fabs(s_obs - 2.0) <= 5.0 * se);
  // With every pair detected the two denominators see the same data.
  CHECK(j["emitted"]["sValue"].get<double>() == doctest::Approx(s_obs).epsilon(1e-12));
  CHECK(j["observed"]["terms"].size() == 4);
  CHECK(j["observed"]["terms"][0]["settingADeg"] == 0.0);
  CHECK(j["observed"]["terms"][3]["settingBDeg"] == 135.0);
}

TEST_CASE("test shows the discarded-pair bias and the subtraction making it worse") {
  const std::string cfg = write_temp_config("bias", kCap75Config);
  const auto r = run_cli("test --config " + cfg + " --subtract-accidentals");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.output);
  const double s_obs = j["observed"]["sValue"].get<double>();
  const double s_emit = j["emitted"]["sValue"].get<double>();
  CHECK(s_obs > 2.5);
  CHECK(std::fabs(s_emit) < 2.1);
  CHECK(j["observed"]["violatesClassical"] == true);
  REQUIRE(j.contains("accidentalSubtracted"));
  const double s_adj = j["accidentalSubtracted"]["sValue"].get<double>();
  CHECK(s_adj > s_obs);
  CHECK(j["accidentalSubtracted"].contains("clippedCells"));
  CHECK(j["accidentalSubtracted"].contains("clippedMass"));
}

TEST_CASE("scan writes counts and diagnostics files") {
  const std::string cfg = write_temp_config("scan", kCap75Config);
  const std::string out_csv = "cli_test_scan_out.csv";
  const std::string out_diag = "cli_test_scan_diag.json";
  const auto r = run_cli("scan --config " + cfg + " --phi-min 0 --phi-max 180 --phi-points 7 " +
                         "--out " + out_csv + " --diagnostics " + out_diag);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.empty());

  std::ifstream csv_in(out_csv);
  REQUIRE(csv_in.good());
  std::stringstream csv_text;
  csv_text << csv_in.rdbuf();
  const Csv csv = parse_csv(csv_text.str());
  CHECK(csv.header.rfind("phi_deg,setting_a_deg,setting_b_deg,nn,", 0) == 0);
  REQUIRE(csv.rows.size() == 7);
  for (const auto& row : csv.rows) {
    REQUIRE(row.size() == 19);
    CHECK(std::stod(row[13]) == 100000.0);  // emitted
  }
  // Total rate falls from aligned to crossed settings for a 75 degree cap.
  CHECK(std::stod(csv.rows[0][16]) > std::stod(csv.rows[3][16]));

  std::ifstream diag_in(out_diag);
  REQUIRE(diag_in.good());
  const json d = json::parse(diag_in);
  CHECK(d["manifest"]["command"] == "scan");
  CHECK(d["totalRateMaxRelativeVariation"].get<double>() > 0.1);
  CHECK(d.contains("bellAngleTotalsGap"));
  CHECK(d.contains("rotationalInvarianceMaxZ"));
  CHECK(std::fabs(d["nsSnAsymmetryZ"].get<double>()) < 4.0);
}

TEST_CASE("scan accepts an explicit grid") {
  const std::string cfg = write_temp_config("scan_grid", kCap75Config);
  const auto r = run_cli("scan --config " + cfg + " --phi-grid 0,45,90 --fixed-a 30");
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.rows.size() == 3);
  CHECK(std::stod(csv.rows[1][0]) == doctest::Approx(45.0));
  CHECK(std::stod(csv.rows[1][1]) == doctest::Approx(30.0));
  CHECK(std::stod(csv.rows[1][2]) == doctest::Approx(75.0));
}

TEST_CASE("oracle cross-checks agree with the closed form") {
  const auto r = run_cli(
      "oracle --alpha 22.5 --beta 75 --polar-steps 500 --azimuth-steps 1000 "
      "--mc-samples 20000 --seed 7");
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(r.output);
  CHECK(csv.header ==
        "alpha_deg,beta_deg,closed_form,quadrature,quad_abs_delta,mc_value,mc_standard_error,"
        "mc_abs_delta");
  REQUIRE(csv.rows.size() == 1);
  const auto& row = csv.rows[0];
  REQUIRE(row.size() == 8);
  CHECK(std::stod(row[2]) == doctest::Approx(0.25008764694591301).epsilon(1e-8));
  CHECK(std::stod(row[4]) < 1e-3);
  const double se = std::stod(row[6]);
  CHECK(se > 0.0);
  CHECK(std::stod(row[7]) <= 5.0 * se);
}

TEST_CASE("oracle skips the Monte Carlo columns when not requested") {
  const auto r = run_cli("oracle --alpha 10 --beta 60 --polar-steps 200 --azimuth-steps 400");
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.rows.size() == 1);
  const auto& row = csv.rows[0];
  REQUIRE(row.size() == 8);
  CHECK(row[5].empty());
  CHECK(row[6].empty());
  CHECK(row[7].empty());
}

TEST_CASE("config problems are reported with exit code 2") {
  const auto missing = run_cli("simulate --config does_not_exist.json --setting-a 0 --setting-b 0");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("error:") != std::string::npos);
  CHECK(missing.output.find("cannot read config file") != std::string::npos);

  const std::string broken = write_temp_config("broken", "{\"schemaVersion\": 1,");
  const auto malformed =
      run_cli("simulate --config " + broken + " --setting-a 0 --setting-b 0");
  CHECK(malformed.exit_code == 2);
  CHECK(malformed.output.find("error:") != std::string::npos);

  const std::string unknown = write_temp_config(
      "unknown", R"({"schemaVersion": 1, "nPairs": 10, "seed": 1, "mystery": true})");
  const auto rejected = run_cli("simulate --config " + unknown + " --setting-a 0 --setting-b 0");
  CHECK(rejected.exit_code == 2);
  CHECK(rejected.output.find("mystery") != std::string::npos);
}

TEST_CASE("the shipped example config runs as documented") {
  const std::string cfg = std::string(LLAB_CONFIG_DIR) + "/example.json";
  const auto r = run_cli("simulate --config " + cfg + " --setting-a 0 --setting-b 45");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.output);
  CHECK(j["counts"]["emitted"].get<double>() > 0.0);

  const std::string demo = std::string(LLAB_CONFIG_DIR) + "/subtraction_bias_demo.json";
  const auto t = run_cli("test --config " + demo + " --subtract-accidentals");
  REQUIRE(t.exit_code == 0);
  const json tj = json::parse(t.output);
  CHECK(tj["accidentalSubtracted"]["sValue"].get<double>() >
        tj["observed"]["sValue"].get<double>());
}
