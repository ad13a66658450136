#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "core/analytic.hpp"
#include "core/engine.hpp"
#include "core/oracle.hpp"

using namespace llab;
using namespace llab::oracle;

namespace {
constexpr double kBeta75 = 5.0 * kPi / 12.0;

QuadratureSpec spec(int polar, int azimuth) {
  QuadratureSpec s;
  s.polar_steps = polar;
  s.azimuth_steps = azimuth;
  return s;
}
}  // namespace

TEST_CASE("quadrature reproduces the closed-form overlap") {
  const QuadratureSpec q = spec(1000, 2000);
  const struct {
    double alpha, beta;
  } cases[] = {{kPi / 8.0, kBeta75}, {kPi / 4.0, kBeta75}, {0.3, 1.0},
               {0.6, 1.2},           {0.2, 0.5},           {0.75, 0.8}};
  for (const auto& c : cases) {
    const double closed = analytic::cap_overlap_fraction(c.alpha, c.beta);
    const double quad = cap_overlap_quad(c.alpha, c.beta, q);
    INFO("alpha ", c.alpha, " beta ", c.beta);
    CHECK(std::fabs(quad - closed) <= 5e-5);
  }
}

TEST_CASE("quadrature error shrinks when the grid is refined") {
  const struct {
    double alpha, beta;
  } cases[] = {{0.2, 0.5}, {kPi / 8.0, kBeta75}};
  for (const auto& c : cases) {
    const double coarse = cap_overlap_quad(c.alpha, c.beta, spec(250, 500));
    const double fine = cap_overlap_quad(c.alpha, c.beta, spec(2000, 4000));
    const double closed = analytic::cap_overlap_fraction(c.alpha, c.beta);
    CHECK(std::fabs(fine - closed) < std::fabs(coarse - closed));
  }
}

TEST_CASE("quadrature is stable under grid doubling away from the contact point") {
  const struct {
    double alpha, beta;
  } cases[] = {{0.2, 0.5}, {kPi / 8.0, kBeta75}};
  for (const auto& c : cases) {
    const double base = cap_overlap_quad(c.alpha, c.beta, spec(4000, 8000));
    const double doubled = cap_overlap_quad(c.alpha, c.beta, spec(8000, 16000));
    INFO("alpha ", c.alpha, " beta ", c.beta);
    CHECK(std::fabs(base - doubled) <= 1e-6);
  }
}

TEST_CASE("quadrature is deterministic for equal inputs") {
  const double a = cap_overlap_quad(0.4, 1.1, spec(600, 1200));
  const double b = cap_overlap_quad(0.4, 1.1, spec(600, 1200));
  CHECK(a == b);
}

TEST_CASE("disjoint caps integrate to exactly zero") {
  CHECK(cap_overlap_quad(0.9, 0.5, spec(500, 1000)) == 0.0);
  CHECK(cap_overlap_quad(kPi / 2.0, kPi / 4.0, spec(500, 1000)) == 0.0);
}

TEST_CASE("joint outcome probabilities form a distribution") {
  DetectorModel det;
  det.n_cap.half_angle = 1.0;
  det.s_cap.half_angle = 0.8;
  const SourceModel source;
  const JointProbabilities j = quad_joint(det, 0.1, det, 0.9, source, true, spec(400, 800));
  CHECK(std::fabs(j.sum() - 1.0) <= 1e-12);
  for (const auto& row : j.p)
    for (double v : row) CHECK(v >= 0.0);
  // Side A's N marginal is its cap fraction, independent of side B.
  double marginal = 0.0;
  for (int ib = 0; ib < 4; ++ib) marginal += j.p[JointProbabilities::kN][ib];
  CHECK(marginal == doctest::Approx(0.5 * (1.0 - std::cos(1.0))).epsilon(1e-3));
}

TEST_CASE("quadrature agrees with a simulated run") {
  ExperimentConfig cfg;
  cfg.n_pairs = 200000;
  cfg.seed = 404;
  cfg.detector_a.n_cap.half_angle = 1.0;
  cfg.detector_a.s_cap.half_angle = 1.0;
  cfg.detector_b = cfg.detector_a;
  const JointProbabilities j = quad_joint(cfg.detector_a, 0.3, cfg.detector_b, 1.0, cfg.source,
                                          true, spec(1000, 2000));
  const CountsTable t = run_pair(cfg, 0.3, 1.0);
  const auto check_cell = [&](std::uint64_t count, double p) {
    const double sigma = std::sqrt(p * (1.0 - p) / cfg.n_pairs);
    CHECK(std::fabs(static_cast<double>(count) / cfg.n_pairs - p) <= 4.0 * sigma + 1e-9);
  };
  check_cell(t.nn, j.coincidence(Channel::N, Channel::N));
  check_cell(t.ss, j.coincidence(Channel::S, Channel::S));
  check_cell(t.ns, j.coincidence(Channel::N, Channel::S));
  check_cell(t.sn, j.coincidence(Channel::S, Channel::N));
  check_cell(t.neither, j.p[JointProbabilities::kNone][JointProbabilities::kNone]);
}

TEST_CASE("opposite spins reach the quadrature as the mirrored separation") {
  DetectorModel det;
  det.n_cap.half_angle = kBeta75;
  det.s_cap.half_angle = kBeta75;
  const SourceModel source;
  const double phi = 0.6;
  const JointProbabilities j = quad_joint(det, 0.0, det, phi, source, false, spec(1000, 2000));
  const double expected = analytic::p_like(analytic::effective_phi(phi, false), kBeta75);
  CHECK(std::fabs(j.coincidence(Channel::N, Channel::N) - expected) <= 5e-5);
}

TEST_CASE("a constant stochastic response integrates exactly") {
  DetectorModel det;
  det.response = [](const Vec3&, Channel c) { return c == Channel::N ? 0.3 : 0.2; };
  const SourceModel source;
  const JointProbabilities j = quad_joint(det, 0.0, det, 1.0, source, true, spec(100, 200));
  // P(side = N) = 0.3 * 0.8 everywhere, independent across sides.
  CHECK(j.coincidence(Channel::N, Channel::N) == doctest::Approx(0.24 * 0.24).epsilon(1e-12));
  CHECK(j.p[JointProbabilities::kInvalid][JointProbabilities::kInvalid] ==
        doctest::Approx(0.06 * 0.06).epsilon(1e-12));
}

TEST_CASE("anisotropic sources reweight the quadrature") {
  // Density 1 + 2 z^2 pushes marks toward the poles, away from caps in the
  // x-z plane whose axes sit near the equator.
  SourceModel aniso;
  aniso.kind = SourceModel::Kind::Anisotropic;
  aniso.strength = 2.0;
  const SourceModel uniform;
  DetectorModel det;
  det.n_cap.half_angle = 0.5;
  det.s_cap.half_angle = 0.5;
  const double with = quad_joint(det, 0.0, det, 0.0, aniso, true, spec(800, 1600))
                          .coincidence(Channel::N, Channel::N);
  const double without = quad_joint(det, 0.0, det, 0.0, uniform, true, spec(800, 1600))
                             .coincidence(Channel::N, Channel::N);
  CHECK(with < without);
  // Cross-check the reweighted value against the simulator.
  ExperimentConfig cfg;
  cfg.n_pairs = 300000;
  cfg.seed = 909;
  cfg.source = aniso;
  cfg.detector_a = det;
  cfg.detector_b = det;
  const CountsTable t = run_pair(cfg, 0.0, 0.0);
  const double sigma = std::sqrt(with * (1.0 - with) / cfg.n_pairs);
  CHECK(std::fabs(static_cast<double>(t.nn) / cfg.n_pairs - with) <= 4.0 * sigma + 1e-9);
}

TEST_CASE("Monte Carlo estimate brackets the closed form") {
  const struct {
    double alpha, beta;
  } cases[] = {{kPi / 8.0, kBeta75}, {0.3, 1.0}, {0.2, 0.5}};
  for (const auto& c : cases) {
    const McEstimate e = cap_overlap_mc(c.alpha, c.beta, 400000, 1234);
    const double closed = analytic::cap_overlap_fraction(c.alpha, c.beta);
    INFO("alpha ", c.alpha, " beta ", c.beta);
    CHECK(e.standard_error > 0.0);
    CHECK(std::fabs(e.value - closed) <= 4.0 * e.standard_error);
  }
}

TEST_CASE("Monte Carlo runs are reproducible by seed") {
  const McEstimate a = cap_overlap_mc(0.4, 1.0, 50000, 77);
  const McEstimate b = cap_overlap_mc(0.4, 1.0, 50000, 77);
  const McEstimate c = cap_overlap_mc(0.4, 1.0, 50000, 78);
  CHECK(a.value == b.value);
  CHECK(a.value != c.value);
}

TEST_CASE("oracle rejects empty sample and step counts") {
  CHECK_THROWS_AS(cap_overlap_mc(0.4, 1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(cap_overlap_quad(0.4, 1.0, spec(0, 100)), std::invalid_argument);
  CHECK_THROWS_AS(cap_overlap_quad(0.4, 1.0, spec(100, -1)), std::invalid_argument);
  CHECK_THROWS_AS(cap_overlap_quad(-0.1, 1.0, spec(100, 100)), std::invalid_argument);
}
