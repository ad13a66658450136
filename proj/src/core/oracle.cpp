#include "core/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "core/engine.hpp"

namespace llab::oracle {

namespace {

int category_of(Outcome o) {
  switch (o) {
    case Outcome::N:
    case Outcome::Detect:  // analyser-removed detections live in the N column
      return JointProbabilities::kN;
    case Outcome::S:
      return JointProbabilities::kS;
    case Outcome::NoDetect:
      return JointProbabilities::kNone;
    case Outcome::Invalid:
      break;
  }
  return JointProbabilities::kInvalid;
}

// Category distribution of one side at fixed lambda.  Deterministic detectors
// put all mass on the engine's own classification; stochastic responses give
// the product-form distribution over the same categories.
void side_category_probs(const BoundDetector& det, const Vec3& lambda, double out[4]) {
  out[0] = out[1] = out[2] = out[3] = 0.0;
  if (!det.response) {
    EventRng unused(0, 0, 0);  // deterministic path draws nothing
    out[category_of(evaluate_outcome(lambda, det, unused))] = 1.0;
    return;
  }
  const ChannelResponse& p = *det.response;
  const double pn = std::clamp(p(lambda, Channel::N), 0.0, 1.0);
  switch (det.mode) {
    case DetectorMode::AnalyserRemoved:
    case DetectorMode::SingleChannelN:
      out[JointProbabilities::kN] = pn;
      out[JointProbabilities::kNone] = 1.0 - pn;
      return;
    case DetectorMode::TwoChannel:
      break;
  }
  const double ps = std::clamp(p(lambda, Channel::S), 0.0, 1.0);
  out[JointProbabilities::kN] = pn * (1.0 - ps);
  out[JointProbabilities::kS] = ps * (1.0 - pn);
  out[JointProbabilities::kNone] = (1.0 - pn) * (1.0 - ps);
  out[JointProbabilities::kInvalid] = pn * ps;
}

struct RowAccumulator {
  double p[4][4]{};
  double weight = 0.0;
};

}  // namespace

JointProbabilities quad_joint(const DetectorModel& detector_a, double setting_a,
                              const DetectorModel& detector_b, double setting_b,
                              const SourceModel& source, bool identical_spins,
                              const QuadratureSpec& spec) {
  if (spec.polar_steps <= 0 || spec.azimuth_steps <= 0)
    throw std::invalid_argument("quad_joint: step counts must be positive");
  validate(source);
  validate(detector_a);
  validate(detector_b);
  const BoundDetector det_a = bind_detector(detector_a, setting_a);
  const BoundDetector det_b = bind_detector(detector_b, setting_b);

  const int nc = spec.polar_steps;
  const int naz = spec.azimuth_steps;
  const double dc = 2.0 / nc;
  std::vector<double> cos_az(naz), sin_az(naz);
  for (int j = 0; j < naz; ++j) {
    const double az = 2.0 * kPi * (j + 0.5) / naz;
    cos_az[j] = std::cos(az);
    sin_az[j] = std::sin(az);
  }

  // One accumulator per polar row, each filled in azimuth order by whichever
  // thread owns the row; the final fold below runs in row order.  The result
  // is therefore independent of the thread count.
  std::vector<RowAccumulator> rows(nc);
  const bool both_deterministic = det_a.response == nullptr && det_b.response == nullptr;
  const auto run_rows = [&](int row_begin, int row_end) {
    EventRng unused(0, 0, 0);  // deterministic outcomes draw nothing
    double pa[4], pb[4];
    for (int i = row_begin; i < row_end; ++i) {
      RowAccumulator& acc = rows[i];
      const double c = -1.0 + (i + 0.5) * dc;
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int j = 0; j < naz; ++j) {
        const Vec3 lambda{s * cos_az[j], s * sin_az[j], c};
        const Vec3 lambda_b = identical_spins ? lambda : -lambda;
        const double w = source_density(source, lambda);
        if (both_deterministic) {
          // All mass in one cell; skip the 4x4 walk.
          const int ia = category_of(evaluate_outcome(lambda, det_a, unused));
          const int ib = category_of(evaluate_outcome(lambda_b, det_b, unused));
          acc.p[ia][ib] += w;
        } else {
          side_category_probs(det_a, lambda, pa);
          side_category_probs(det_b, lambda_b, pb);
          for (int ia = 0; ia < 4; ++ia) {
            if (pa[ia] == 0.0) continue;
            const double wa = w * pa[ia];
            for (int ib = 0; ib < 4; ++ib) {
              if (pb[ib] == 0.0) continue;
              acc.p[ia][ib] += wa * pb[ib];
            }
          }
        }
        acc.weight += w;
      }
    }
  };

  const unsigned threads = std::min<unsigned>(resolve_thread_count(),
                                              static_cast<unsigned>(std::max(1, nc / 64)));
  if (threads <= 1) {
    run_rows(0, nc);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) {
      const int begin = static_cast<int>(static_cast<long long>(nc) * k / threads);
      const int end = static_cast<int>(static_cast<long long>(nc) * (k + 1) / threads);
      workers.emplace_back(run_rows, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  JointProbabilities out;
  double total_weight = 0.0;
  for (const auto& row : rows) {
    for (int ia = 0; ia < 4; ++ia)
      for (int ib = 0; ib < 4; ++ib) out.p[ia][ib] += row.p[ia][ib];
    total_weight += row.weight;
  }
  for (auto& r : out.p)
    for (double& v : r) v /= total_weight;
  return out;
}

McEstimate mc_coincidence(const DetectorModel& detector_a, double setting_a,
                          const DetectorModel& detector_b, double setting_b,
                          const SourceModel& source, bool identical_spins, Channel out_a,
                          Channel out_b, std::uint64_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("mc_coincidence: n_samples must be positive");
  validate(source);
  validate(detector_a);
  validate(detector_b);
  const BoundDetector det_a = bind_detector(detector_a, setting_a);
  const BoundDetector det_b = bind_detector(detector_b, setting_b);
  const int want_a = out_a == Channel::N ? JointProbabilities::kN : JointProbabilities::kS;
  const int want_b = out_b == Channel::N ? JointProbabilities::kN : JointProbabilities::kS;

  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    EventRng rng(seed, 0, i);
    const Vec3 lambda = sample_lambda(source, rng);
    const Outcome a = evaluate_outcome(lambda, det_a, rng);
    const Outcome b = evaluate_outcome(identical_spins ? lambda : -lambda, det_b, rng);
    if (category_of(a) == want_a && category_of(b) == want_b) ++hits;
  }
  McEstimate e;
  e.value = static_cast<double>(hits) / static_cast<double>(n_samples);
  e.standard_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n_samples));
  return e;
}

namespace {

DetectorModel equal_caps(double beta) {
  DetectorModel det;
  det.n_cap.half_angle = beta;
  det.s_cap.half_angle = beta;
  return det;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= kPi / 2.0))
    throw std::invalid_argument("cap overlap oracle: alpha outside [0, pi/2]");
}

}  // namespace

double cap_overlap_quad(double alpha, double beta, const QuadratureSpec& spec) {
  check_alpha(alpha);
  // S-cap axes of two-channel detectors at settings -alpha and +alpha are
  // exactly 2*alpha apart, so P(S,S) is the overlap fraction under test.
  const DetectorModel det = equal_caps(beta);
  const SourceModel source;
  return quad_joint(det, -alpha, det, alpha, source, true, spec).coincidence(Channel::S, Channel::S);
}

McEstimate cap_overlap_mc(double alpha, double beta, std::uint64_t n_samples, std::uint64_t seed) {
  check_alpha(alpha);
  const DetectorModel det = equal_caps(beta);
  const SourceModel source;
  return mc_coincidence(det, -alpha, det, alpha, source, true, Channel::S, Channel::S, n_samples,
                        seed);
}

}  // namespace llab::oracle
