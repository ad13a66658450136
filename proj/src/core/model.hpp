#pragma once

#include <functional>

#include "core/geometry.hpp"
#include "core/rng.hpp"

namespace llab {

enum class Channel { N, S };

// Per-event result on one side.  `Detect` is the channel-less outcome of an
// analyser-removed run; `Invalid` marks a double firing the experiment would
// discard.
enum class Outcome { N, S, NoDetect, Detect, Invalid };

struct SourceModel {
  enum class Kind { UniformSphere, Anisotropic };
  Kind kind = Kind::UniformSphere;
  // Anisotropic only: density on the sphere proportional to
  // 1 + strength * (lambda . axis)^2, axis must be unit length.
  Vec3 axis{0.0, 0.0, 1.0};
  double strength = 0.0;
};

// One detection cap: half-angle plus an optional misalignment of its axis
// within the analysis plane.
struct ChannelCap {
  double half_angle = kPi / 2.0;  // (0, pi/2]
  double axis_offset = 0.0;
};

enum class DetectorMode { TwoChannel, SingleChannelN, AnalyserRemoved };

// Optional stochastic response: probability that the given channel fires for
// this hidden variable.  When unset the response is the deterministic cap rule.
using ChannelResponse = std::function<double(const Vec3& lambda, Channel)>;

struct DetectorModel {
  ChannelCap n_cap;
  ChannelCap s_cap;
  DetectorMode mode = DetectorMode::TwoChannel;
  ChannelResponse response;
};

// Throw std::invalid_argument on out-of-range parameters.
void validate(const SourceModel& source);
void validate(const DetectorModel& detector);

// A detector fixed at a concrete setting, cap axes and thresholds precomputed.
// Holds a pointer into the DetectorModel's response, so the model must outlive
// the bound copy.
struct BoundDetector {
  Vec3 n_axis;
  Vec3 s_axis;
  double n_cos_half = 0.0;
  double s_cos_half = 0.0;
  DetectorMode mode = DetectorMode::TwoChannel;
  const ChannelResponse* response = nullptr;
};

BoundDetector bind_detector(const DetectorModel& detector, double setting);

// Density of the source at lambda, relative to uniform (so identically 1 for
// the uniform sphere).  Used by the quadrature oracle and rejection sampling.
double source_density(const SourceModel& source, const Vec3& lambda);

Vec3 sample_lambda(const SourceModel& source, EventRng& rng);

// Classify one hidden variable at one detector.  Consumes randomness only when
// the detector has a stochastic response; the deterministic rule leaves the
// generator untouched.
Outcome evaluate_outcome(const Vec3& lambda, const BoundDetector& detector, EventRng& rng);

}  // namespace llab
