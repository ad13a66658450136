#pragma once

#include <cstdint>

namespace llab {

// Tally of one sub-experiment.  Every emitted pair lands in exactly one cell,
// so the ten cells sum to `emitted`; merge and classification code checks this.
struct CountsTable {
  std::uint64_t nn = 0, ss = 0, ns = 0, sn = 0;          // coincidences
  std::uint64_t a_only_n = 0, a_only_s = 0;              // singles, side A fired
  std::uint64_t b_only_n = 0, b_only_s = 0;              // singles, side B fired
  std::uint64_t neither = 0;                             // no detection at all
  std::uint64_t invalid = 0;                             // discarded (double firings)
  std::uint64_t emitted = 0;

  std::uint64_t coincidences() const { return nn + ss + ns + sn; }

  std::uint64_t cell_sum() const {
    return coincidences() + a_only_n + a_only_s + b_only_n + b_only_s + neither + invalid;
  }

  bool conserved() const { return cell_sum() == emitted; }

  CountsTable& operator+=(const CountsTable& o) {
    nn += o.nn;
    ss += o.ss;
    ns += o.ns;
    sn += o.sn;
    a_only_n += o.a_only_n;
    a_only_s += o.a_only_s;
    b_only_n += o.b_only_n;
    b_only_s += o.b_only_s;
    neither += o.neither;
    invalid += o.invalid;
    emitted += o.emitted;
    return *this;
  }
};

// Real-valued view of a table.  Estimators work on this so they can also be
// fed background-subtracted tables, whose cells are no longer integers (and no
// longer necessarily sum to `emitted`).
struct RealCounts {
  double nn = 0, ss = 0, ns = 0, sn = 0;
  double a_only_n = 0, a_only_s = 0, b_only_n = 0, b_only_s = 0;
  double neither = 0, invalid = 0;
  double emitted = 0;

  RealCounts() = default;
  RealCounts(const CountsTable& t)
      : nn(static_cast<double>(t.nn)),
        ss(static_cast<double>(t.ss)),
        ns(static_cast<double>(t.ns)),
        sn(static_cast<double>(t.sn)),
        a_only_n(static_cast<double>(t.a_only_n)),
        a_only_s(static_cast<double>(t.a_only_s)),
        b_only_n(static_cast<double>(t.b_only_n)),
        b_only_s(static_cast<double>(t.b_only_s)),
        neither(static_cast<double>(t.neither)),
        invalid(static_cast<double>(t.invalid)),
        emitted(static_cast<double>(t.emitted)) {}

  double coincidences() const { return nn + ss + ns + sn; }
};

}  // namespace llab
