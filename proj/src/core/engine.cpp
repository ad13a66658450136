#include "core/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace llab {

void ExperimentConfig::validate() const {
  if (n_pairs == 0) throw std::invalid_argument("config: nPairs must be positive");
  if (!(dark_rate >= 0.0 && dark_rate < 1.0))
    throw std::invalid_argument("config: darkRate must be in [0, 1)");
  llab::validate(source);
  llab::validate(detector_a);
  llab::validate(detector_b);
}

unsigned resolve_thread_count() {
  if (const char* env = std::getenv("LOOPHOLE_LAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 1024ul));
    // unparsable or 0: fall through to automatic
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {

// Spurious dark firing, applied after the real outcome.  Consumes no
// randomness when the rate is zero, so dark-free runs keep the purity property
// of the deterministic response.
Outcome apply_dark(Outcome real, double dark_rate, EventRng& rng) {
  if (dark_rate <= 0.0) return real;
  if (rng.next_unit() >= dark_rate) return real;
  const bool dark_n = rng.next_unit() < 0.5;
  if (real != Outcome::NoDetect) return Outcome::Invalid;  // piled onto a real firing
  return dark_n ? Outcome::N : Outcome::S;
}

void classify(CountsTable& t, Outcome a, Outcome b) {
  // Analyser-removed detections are tallied in the N column.
  const auto as_channel = [](Outcome o) { return o == Outcome::Detect ? Outcome::N : o; };
  a = as_channel(a);
  b = as_channel(b);
  if (a == Outcome::Invalid || b == Outcome::Invalid) {
    ++t.invalid;
    return;
  }
  const bool a_fired = a != Outcome::NoDetect;
  const bool b_fired = b != Outcome::NoDetect;
  if (a_fired && b_fired) {
    if (a == Outcome::N)
      b == Outcome::N ? ++t.nn : ++t.ns;
    else
      b == Outcome::N ? ++t.sn : ++t.ss;
  } else if (a_fired) {
    a == Outcome::N ? ++t.a_only_n : ++t.a_only_s;
  } else if (b_fired) {
    b == Outcome::N ? ++t.b_only_n : ++t.b_only_s;
  } else {
    ++t.neither;
  }
}

CountsTable run_range(const ExperimentConfig& cfg, const BoundDetector& det_a,
                      const BoundDetector& det_b, std::uint64_t substream, std::uint64_t begin,
                      std::uint64_t end) {
  CountsTable t;
  for (std::uint64_t i = begin; i < end; ++i) {
    EventRng rng(cfg.seed, substream, i);
    const Vec3 lambda = sample_lambda(cfg.source, rng);
    Outcome a = evaluate_outcome(lambda, det_a, rng);
    Outcome b = evaluate_outcome(cfg.identical_spins ? lambda : -lambda, det_b, rng);
    a = apply_dark(a, cfg.dark_rate, rng);
    b = apply_dark(b, cfg.dark_rate, rng);
    classify(t, a, b);
  }
  t.emitted = end - begin;
  return t;
}

}  // namespace

CountsTable run_pair(const ExperimentConfig& config, double setting_a, double setting_b,
                     std::uint64_t substream) {
  config.validate();
  const BoundDetector det_a = bind_detector(config.detector_a, setting_a);
  const BoundDetector det_b = bind_detector(config.detector_b, setting_b);

  // Small jobs are not worth spawning for.
  const unsigned threads =
      config.n_pairs < (1u << 16)
          ? 1u
          : static_cast<unsigned>(std::min<std::uint64_t>(resolve_thread_count(), config.n_pairs));
  CountsTable total;
  if (threads <= 1) {
    total = run_range(config, det_a, det_b, substream, 0, config.n_pairs);
  } else {
    std::vector<CountsTable> parts(threads);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) {
      const std::uint64_t begin = config.n_pairs * k / threads;
      const std::uint64_t end = config.n_pairs * (k + 1) / threads;
      workers.emplace_back([&, k, begin, end] {
        parts[k] = run_range(config, det_a, det_b, substream, begin, end);
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& p : parts) total += p;
  }
  if (!total.conserved()) throw std::logic_error("run_pair: counts table lost events");
  return total;
}

namespace {

void check_strictly_increasing(std::span<const double> grid, const char* who) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument(std::string(who) + ": grid must be strictly increasing");
}

}  // namespace

ScanResult run_scan(const ExperimentConfig& config, std::span<const double> phi_grid,
                    double fixed_a) {
  check_strictly_increasing(phi_grid, "run_scan");
  ScanResult result;
  result.entries.reserve(phi_grid.size());
  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    ScanEntry e;
    e.setting_a = fixed_a;
    e.setting_b = fixed_a + phi_grid[i];
    e.counts = run_pair(config, e.setting_a, e.setting_b, i);
    result.entries.push_back(e);
  }
  return result;
}

ScanResult run_grid_ab(const ExperimentConfig& config, std::span<const double> a_grid,
                       std::span<const double> b_grid) {
  check_strictly_increasing(a_grid, "run_grid_ab");
  check_strictly_increasing(b_grid, "run_grid_ab");
  ScanResult result;
  result.entries.reserve(a_grid.size() * b_grid.size());
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    for (std::size_t j = 0; j < b_grid.size(); ++j) {
      ScanEntry e;
      e.setting_a = a_grid[i];
      e.setting_b = b_grid[j];
      e.counts = run_pair(config, e.setting_a, e.setting_b, i * b_grid.size() + j);
      result.entries.push_back(e);
    }
  }
  return result;
}

std::array<CountsTable, 4> run_chsh(const ExperimentConfig& config, double a, double a_prime,
                                    double b, double b_prime) {
  return {
      run_pair(config, a, b, 0),
      run_pair(config, a, b_prime, 1),
      run_pair(config, a_prime, b, 2),
      run_pair(config, a_prime, b_prime, 3),
  };
}

}  // namespace llab
