#include "core/config.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include <json.hpp>

namespace llab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

// Unknown fields are rejected so a typo cannot silently fall back to default
// physics.
void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) fail("unknown field '" + item.key() + "' in " + ctx);
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_finite_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) fail(ctx + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ctx + " must be finite");
  return v;
}

std::uint64_t get_uint(const json& j, const std::string& ctx) {
  if (!j.is_number_unsigned()) fail(ctx + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

ChannelCap parse_cap(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx + " must be an object");
  check_keys(j, ctx, {"halfAngleDeg", "offsetDeg"});
  const json* half = find(j, "halfAngleDeg");
  if (!half) fail(ctx + " needs halfAngleDeg");
  ChannelCap cap;
  const double deg = get_finite_number(*half, ctx + ".halfAngleDeg");
  if (!(deg > 0.0 && deg <= 90.0)) fail(ctx + ".halfAngleDeg must be in (0, 90]");
  cap.half_angle = degrees_to_radians(deg);
  if (const json* off = find(j, "offsetDeg"))
    cap.axis_offset = degrees_to_radians(get_finite_number(*off, ctx + ".offsetDeg"));
  return cap;
}

DetectorModel parse_detector(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx + " must be an object");
  check_keys(j, ctx, {"mode", "nCap", "sCap"});
  DetectorModel det;
  if (const json* m = find(j, "mode")) {
    if (!m->is_string()) fail(ctx + ".mode must be a string");
    const std::string s = m->get<std::string>();
    if (s == "twoChannel")
      det.mode = DetectorMode::TwoChannel;
    else if (s == "singleChannelN")
      det.mode = DetectorMode::SingleChannelN;
    else if (s == "analyserRemoved")
      det.mode = DetectorMode::AnalyserRemoved;
    else
      fail(ctx + ".mode: unknown mode '" + s + "'");
  }
  if (const json* n = find(j, "nCap")) det.n_cap = parse_cap(*n, ctx + ".nCap");
  if (const json* s = find(j, "sCap")) {
    if (det.mode != DetectorMode::TwoChannel)
      fail(ctx + ".sCap is only valid for twoChannel mode");
    det.s_cap = parse_cap(*s, ctx + ".sCap");
  } else {
    det.s_cap = det.n_cap;  // symmetric detector unless told otherwise
  }
  return det;
}

SourceModel parse_source(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx + " must be an object");
  check_keys(j, ctx, {"kind", "axis", "strength"});
  const json* kind = find(j, "kind");
  if (!kind) fail(ctx + " needs kind");
  if (!kind->is_string()) fail(ctx + ".kind must be a string");
  const std::string s = kind->get<std::string>();

  SourceModel src;
  if (s == "uniformSphere") {
    if (find(j, "axis") || find(j, "strength"))
      fail(ctx + ": axis/strength are only valid for kind anisotropic");
    return src;
  }
  if (s != "anisotropic") fail(ctx + ".kind: unknown kind '" + s + "'");

  src.kind = SourceModel::Kind::Anisotropic;
  const json* axis = find(j, "axis");
  const json* strength = find(j, "strength");
  if (!axis || !strength) fail(ctx + ": anisotropic needs axis and strength");
  if (!axis->is_array() || axis->size() != 3) fail(ctx + ".axis must be [x, y, z]");
  Vec3 v;
  v.x = get_finite_number((*axis)[0], ctx + ".axis[0]");
  v.y = get_finite_number((*axis)[1], ctx + ".axis[1]");
  v.z = get_finite_number((*axis)[2], ctx + ".axis[2]");
  const double len = norm(v);
  if (!(len > 0.0)) fail(ctx + ".axis must be nonzero");
  src.axis = {v.x / len, v.y / len, v.z / len};
  src.strength = get_finite_number(*strength, ctx + ".strength");
  if (!(src.strength >= 0.0)) fail(ctx + ".strength must be >= 0");
  return src;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) fail("not valid JSON");
  if (!root.is_object()) fail("top level must be an object");
  check_keys(root, "top level",
             {"schemaVersion", "nPairs", "seed", "source", "detectorA", "detectorB",
              "identicalSpins", "darkRate"});

  const json* ver = find(root, "schemaVersion");
  if (!ver) fail("schemaVersion is required");
  if (!ver->is_number_integer() && !ver->is_number_unsigned())
    fail("schemaVersion must be an integer");
  if (ver->get<std::int64_t>() != kConfigSchemaVersion)
    fail("unsupported schemaVersion (expected 1)");

  ExperimentConfig cfg;
  const json* n_pairs = find(root, "nPairs");
  if (!n_pairs) fail("nPairs is required");
  cfg.n_pairs = get_uint(*n_pairs, "nPairs");
  if (cfg.n_pairs == 0) fail("nPairs must be positive");

  const json* seed = find(root, "seed");
  if (!seed) fail("seed is required");
  cfg.seed = get_uint(*seed, "seed");

  if (const json* src = find(root, "source")) cfg.source = parse_source(*src, "source");
  if (const json* a = find(root, "detectorA")) cfg.detector_a = parse_detector(*a, "detectorA");
  if (const json* b = find(root, "detectorB")) cfg.detector_b = parse_detector(*b, "detectorB");
  if (const json* ident = find(root, "identicalSpins")) {
    if (!ident->is_boolean()) fail("identicalSpins must be a boolean");
    cfg.identical_spins = ident->get<bool>();
  }
  if (const json* dark = find(root, "darkRate")) {
    cfg.dark_rate = get_finite_number(*dark, "darkRate");
    if (!(cfg.dark_rate >= 0.0 && cfg.dark_rate < 1.0)) fail("darkRate must be in [0, 1)");
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return cfg;
}

namespace {

json cap_to_json(const ChannelCap& cap) {
  return {{"halfAngleDeg", radians_to_degrees(cap.half_angle)},
          {"offsetDeg", radians_to_degrees(cap.axis_offset)}};
}

json detector_to_json(const DetectorModel& det) {
  json j;
  switch (det.mode) {
    case DetectorMode::TwoChannel:
      j["mode"] = "twoChannel";
      break;
    case DetectorMode::SingleChannelN:
      j["mode"] = "singleChannelN";
      break;
    case DetectorMode::AnalyserRemoved:
      j["mode"] = "analyserRemoved";
      break;
  }
  j["nCap"] = cap_to_json(det.n_cap);
  if (det.mode == DetectorMode::TwoChannel) j["sCap"] = cap_to_json(det.s_cap);
  return j;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["schemaVersion"] = kConfigSchemaVersion;
  j["nPairs"] = config.n_pairs;
  j["seed"] = config.seed;
  if (config.source.kind == SourceModel::Kind::UniformSphere) {
    j["source"] = {{"kind", "uniformSphere"}};
  } else {
    j["source"] = {{"kind", "anisotropic"},
                   {"axis", {config.source.axis.x, config.source.axis.y, config.source.axis.z}},
                   {"strength", config.source.strength}};
  }
  j["detectorA"] = detector_to_json(config.detector_a);
  j["detectorB"] = detector_to_json(config.detector_b);
  j["identicalSpins"] = config.identical_spins;
  j["darkRate"] = config.dark_rate;
  return j.dump(2);
}

}  // namespace llab
