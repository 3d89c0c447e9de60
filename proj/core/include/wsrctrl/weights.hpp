#pragma once

// Weight families for the weighted expectation: risk-neutral (w = 1),
// risk-sensitive linear (w ~ exp(theta J_E)) and robust risk-sensitive
// linear (w ~ 1 + theta * sigmoid(alpha J_E - beta E[J_E])). J_E is the
// predictive one-step cost of a parameter draw under the current policy.

#include <iosfwd>
#include <memory>
#include <string_view>

#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/matops.hpp"

namespace wsrctrl {

enum class WeightFamily { RiskNeutral, RSL, RRSL };

std::string_view to_string(WeightFamily f);
WeightFamily parse_weight_family(std::string_view name);  // "rn" | "rsl" | "rrsl"

struct WeightSpec {
  WeightFamily family = WeightFamily::RiskNeutral;
  double theta = 0.0;
  double alpha = 10.0;  // RRSL only
  double beta = 11.0;   // RRSL only
  SymMat sigma;         // E[x x^T] of the reference state; empty means identity

  WeightSpec with_theta(double t) const {
    WeightSpec s = *this;
    s.theta = t;
    return s;
  }
  // The sensitivity that actually enters the weight (RN ignores theta).
  double effective_theta() const { return family == WeightFamily::RiskNeutral ? 0.0 : theta; }
  SymMat sigma_or_identity(Index n) const;
};

// RSL exponents above this raise WeightOverflow instead of saturating.
inline constexpr double kMaxWeightExponent = 700.0;

// tr(((A - B L)^T P (A - B L) + Q + L^T R L) Sigma).
double predictive_cost(const Mat& A, const Mat& B, const Mat& L, const SymMat& P,
                       const SymMat& sigma, const SymMat& Q, const SymMat& R);

// J_E for every sample of the bank, evaluated as a quadratic form in Lambda.
Vec predictive_costs(const SampleBank& bank, const Mat& L, const SymMat& P, const SymMat& sigma,
                     const SymMat& Q, const SymMat& R);

// Un-normalized weight from a sample's J_E and, for RRSL, the bank mean of J_E.
double raw_weight(const WeightSpec& spec, double cost, double mean_cost);

double raw_weight(const WeightSpec& spec, const Mat& A, const Mat& B, const Mat& L, const SymMat& P,
                  const SymMat& Q, const SymMat& R, double mean_cost);

// raw / mean(raw). Throws NumericalError if every raw weight is zero and
// NonFiniteValue on a negative or non-finite entry.
Vec normalize_weights(const Vec& raw);

// Per-sample weights normalized to empirical mean one, together with the
// point (P, L, spec) they were evaluated at.
class WeightedBank {
 public:
  WeightedBank(std::shared_ptr<const SampleBank> bank, Vec costs, Vec raw, Vec weights, SymMat P,
               Mat L, WeightSpec spec);

  const SampleBank& bank() const { return *bank_; }
  const std::shared_ptr<const SampleBank>& bank_ptr() const { return bank_; }
  const Vec& weights() const { return weights_; }
  const Vec& costs() const { return costs_; }
  const Vec& raw_weights() const { return raw_; }
  const SymMat& P() const { return P_; }
  const Mat& L() const { return L_; }
  const WeightSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const SampleBank> bank_;
  Vec costs_;
  Vec raw_;
  Vec weights_;
  SymMat P_;
  Mat L_;
  WeightSpec spec_;
};

WeightedBank build_weighted_bank(std::shared_ptr<const SampleBank> bank, const WeightSpec& spec,
                                 const Mat& L, const SymMat& P, const SymMat& Q, const SymMat& R);

// (1/N) sum_i w_i phi(A_i, B_i).
Mat weighted_expect(const WeightedBank& wbank, const ParamFunction& phi);

// Columns: sample, J_E, raw_weight, weight.
void write_weights_csv(const WeightedBank& wbank, std::ostream& os);

}  // namespace wsrctrl
