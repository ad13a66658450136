#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/counts.hpp"
#include "core/model.hpp"

namespace llab {

struct ExperimentConfig {
  std::uint64_t n_pairs = 0;
  std::uint64_t seed = 0;
  SourceModel source;
  DetectorModel detector_a;
  DetectorModel detector_b;
  // With identical spins both sides see the same lambda; otherwise side B sees
  // the antipodal mark, which swaps its N and S roles.
  bool identical_spins = true;
  // Per side, per event: probability of a spurious firing in a uniformly
  // chosen channel.  A spurious firing on a side that already fired makes the
  // event invalid.  Must stay below 1.
  double dark_rate = 0.0;

  void validate() const;  // throws std::invalid_argument
};

struct ScanEntry {
  double setting_a = 0.0;
  double setting_b = 0.0;
  CountsTable counts;

  double phi() const { return fold_angle_difference(setting_b - setting_a); }
};

struct ScanResult {
  std::vector<ScanEntry> entries;
};

// Worker count: LOOPHOLE_LAB_THREADS when set and positive, hardware
// concurrency otherwise (a value of 0 also means automatic).
unsigned resolve_thread_count();

// Run n_pairs events at fixed settings.  `substream` keys the random stream so
// different sub-experiments of one run draw independent events; repeated calls
// with equal (seed, substream) reproduce the table exactly, independent of
// thread count.
CountsTable run_pair(const ExperimentConfig& config, double setting_a, double setting_b,
                     std::uint64_t substream = 0);

// One sub-experiment per grid point.  phi_grid must be strictly increasing;
// point i runs at (fixed_a, fixed_a + phi_i) on substream i.
ScanResult run_scan(const ExperimentConfig& config, std::span<const double> phi_grid,
                    double fixed_a = 0.0);

// Cartesian product of settings, row-major in a; substream i * n_b + j.
ScanResult run_grid_ab(const ExperimentConfig& config, std::span<const double> a_grid,
                       std::span<const double> b_grid);

// The four sub-experiments of a CHSH run, substreams 0..3, in the order
// (a,b), (a,b'), (a',b), (a',b').
std::array<CountsTable, 4> run_chsh(const ExperimentConfig& config, double a, double a_prime,
                                    double b, double b_prime);

}  // namespace llab
