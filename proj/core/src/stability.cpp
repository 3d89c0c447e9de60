#include "wsrctrl/stability.hpp"

#include <string>

#include "wsrctrl/error.hpp"

namespace wsrctrl {

namespace {

void check_gain(const SampleBank& bank, const Mat& L) {
  if (L.rows() != bank.m() || L.cols() != bank.n()) {
    throw DimensionError("stability: gain is " + std::to_string(L.rows()) + "x" +
                         std::to_string(L.cols()) + ", expected " + std::to_string(bank.m()) +
                         "x" + std::to_string(bank.n()));
  }
}

Mat kron_closed(const Mat& A, const Mat& B, const Mat& L) {
  const Mat closed = A - B * L;
  return kron(closed, closed);
}

}  // namespace

Mat closed_loop_kron_expect(const SampleBank& bank, const Mat& L) {
  check_gain(bank, L);
  return expect(bank, [&](const Mat& A, const Mat& B) { return kron_closed(A, B, L); });
}

Mat closed_loop_kron_expect(const WeightedBank& wbank, const Mat& L) {
  check_gain(wbank.bank(), L);
  return weighted_expect(wbank, [&](const Mat& A, const Mat& B) { return kron_closed(A, B, L); });
}

double ms_radius(const SampleBank& bank, const Mat& L) {
  return spectral_radius(compress(closed_loop_kron_expect(bank, L)));
}

double wms_radius(const WeightedBank& wbank, const Mat& L) {
  return spectral_radius(compress(closed_loop_kron_expect(wbank, L)));
}

StabilityReport ms_check(const SampleBank& bank, const Mat& L) {
  StabilityReport r;
  r.L = L;
  r.rho_plain = ms_radius(bank, L);
  return r;
}

StabilityReport wms_check(const WeightedBank& wbank, const Mat& L) {
  StabilityReport r = ms_check(wbank.bank(), L);
  r.rho_weighted = wms_radius(wbank, L);
  return r;
}

}  // namespace wsrctrl
