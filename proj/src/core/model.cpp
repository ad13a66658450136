#include "core/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace llab {

namespace {

Vec3 uniform_sphere(EventRng& rng) {
  const double c = rng.next_symmetric();  // cos(polar), uniform on [-1, 1)
  const double az = 2.0 * kPi * rng.next_unit();
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return {s * std::cos(az), s * std::sin(az), c};
}

}  // namespace

void validate(const SourceModel& source) {
  if (source.kind == SourceModel::Kind::UniformSphere) return;
  if (!(source.strength >= 0.0))
    throw std::invalid_argument("source: anisotropy strength must be >= 0");
  if (std::fabs(norm(source.axis) - 1.0) > 1e-9)
    throw std::invalid_argument("source: anisotropy axis must be unit length");
}

void validate(const DetectorModel& detector) {
  auto check_cap = [](const ChannelCap& cap, const char* name) {
    if (!(cap.half_angle > 0.0 && cap.half_angle <= kPi / 2.0))
      throw std::invalid_argument(std::string("detector: ") + name +
                                  " half-angle outside (0, pi/2]");
    if (!std::isfinite(cap.axis_offset))
      throw std::invalid_argument(std::string("detector: ") + name + " offset not finite");
  };
  check_cap(detector.n_cap, "N cap");
  if (detector.mode == DetectorMode::TwoChannel) check_cap(detector.s_cap, "S cap");
}

BoundDetector bind_detector(const DetectorModel& detector, double setting) {
  BoundDetector b;
  b.n_axis = setting_direction(setting + detector.n_cap.axis_offset);
  // The S cap sits diametrically opposite the (offset) N direction.
  b.s_axis = -setting_direction(setting + detector.s_cap.axis_offset);
  b.n_cos_half = std::cos(detector.n_cap.half_angle);
  b.s_cos_half = std::cos(detector.s_cap.half_angle);
  b.mode = detector.mode;
  b.response = detector.response ? &detector.response : nullptr;
  return b;
}

double source_density(const SourceModel& source, const Vec3& lambda) {
  if (source.kind == SourceModel::Kind::UniformSphere) return 1.0;
  const double d = dot(lambda, source.axis);
  return 1.0 + source.strength * d * d;
}

Vec3 sample_lambda(const SourceModel& source, EventRng& rng) {
  if (source.kind == SourceModel::Kind::UniformSphere) return uniform_sphere(rng);
  // Rejection against the flat envelope 1 + strength.  Acceptance is at least
  // 1/(1 + strength), so the iteration cap is never reached for sane strengths.
  const double envelope = 1.0 + source.strength;
  for (int iter = 0; iter < 1000000; ++iter) {
    const Vec3 v = uniform_sphere(rng);
    if (rng.next_unit() * envelope <= source_density(source, v)) return v;
  }
  throw std::runtime_error("sample_lambda: rejection sampling did not terminate");
}

Outcome evaluate_outcome(const Vec3& lambda, const BoundDetector& detector, EventRng& rng) {
  if (detector.response) {
    const ChannelResponse& p = *detector.response;
    switch (detector.mode) {
      case DetectorMode::AnalyserRemoved:
        return rng.next_unit() < p(lambda, Channel::N) ? Outcome::Detect : Outcome::NoDetect;
      case DetectorMode::SingleChannelN:
        return rng.next_unit() < p(lambda, Channel::N) ? Outcome::N : Outcome::NoDetect;
      case DetectorMode::TwoChannel: {
        // Both channels always draw, in N then S order, so the stream layout
        // does not depend on the first outcome.
        const bool n_fires = rng.next_unit() < p(lambda, Channel::N);
        const bool s_fires = rng.next_unit() < p(lambda, Channel::S);
        if (n_fires && s_fires) return Outcome::Invalid;
        if (n_fires) return Outcome::N;
        if (s_fires) return Outcome::S;
        return Outcome::NoDetect;
      }
    }
  }
  switch (detector.mode) {
    case DetectorMode::AnalyserRemoved:
      // No analyser: the bare detector sees the mark whenever lambda is within
      // the cap angle of either end of the viewing axis.
      return std::fabs(dot(lambda, detector.n_axis)) > detector.n_cos_half ? Outcome::Detect
                                                                           : Outcome::NoDetect;
    case DetectorMode::SingleChannelN:
      return dot(lambda, detector.n_axis) > detector.n_cos_half ? Outcome::N : Outcome::NoDetect;
    case DetectorMode::TwoChannel:
      break;
  }
  const bool n_hit = dot(lambda, detector.n_axis) > detector.n_cos_half;
  const bool s_hit = dot(lambda, detector.s_axis) > detector.s_cos_half;
  if (n_hit && s_hit) return Outcome::Invalid;  // caps overlap: simultaneous firing
  if (n_hit) return Outcome::N;
  if (s_hit) return Outcome::S;
  return Outcome::NoDetect;
}

}  // namespace llab
