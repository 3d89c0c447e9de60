#pragma once

// Mean-square (MS) and weighted mean-square (WMS) stability of
// x_{t+1} = (A_t - B_t L) x_t. The closed loop is MS stable iff the spectral
// radius of L_n E[(A - B L) kron (A - B L)] D_n is below one; WMS stability
// is the same test with E replaced by the weighted expectation.

#include <optional>

#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/matops.hpp"
#include "wsrctrl/weights.hpp"

namespace wsrctrl {

struct StabilityReport {
  Mat L;
  double rho_plain = 0.0;
  std::optional<double> rho_weighted;

  bool ms_stable() const { return rho_plain < 1.0; }
  std::optional<bool> wms_stable() const {
    if (!rho_weighted) return std::nullopt;
    return *rho_weighted < 1.0;
  }
  double ms_margin() const { return 1.0 - rho_plain; }
  std::optional<double> wms_margin() const {
    if (!rho_weighted) return std::nullopt;
    return 1.0 - *rho_weighted;
  }
};

// E[(A_i - B_i L) kron (A_i - B_i L)] over the bank (n^2 x n^2).
Mat closed_loop_kron_expect(const SampleBank& bank, const Mat& L);
// Weighted version; uses the weights stored in `wbank`.
Mat closed_loop_kron_expect(const WeightedBank& wbank, const Mat& L);

double ms_radius(const SampleBank& bank, const Mat& L);
double wms_radius(const WeightedBank& wbank, const Mat& L);

StabilityReport ms_check(const SampleBank& bank, const Mat& L);
// Fills both radii: plain over the underlying bank, weighted over wbank.
StabilityReport wms_check(const WeightedBank& wbank, const Mat& L);

}  // namespace wsrctrl
