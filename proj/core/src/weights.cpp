#include "wsrctrl/weights.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "wsrctrl/csv.hpp"
#include "wsrctrl/error.hpp"

namespace wsrctrl {

std::string_view to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::RiskNeutral:
      return "rn";
    case WeightFamily::RSL:
      return "rsl";
    case WeightFamily::RRSL:
      return "rrsl";
  }
  return "?";
}

WeightFamily parse_weight_family(std::string_view name) {
  if (name == "rn" || name == "risk-neutral") return WeightFamily::RiskNeutral;
  if (name == "rsl") return WeightFamily::RSL;
  if (name == "rrsl") return WeightFamily::RRSL;
  throw ConfigError("unknown weight family '" + std::string(name) + "' (expected rn, rsl or rrsl)");
}

SymMat WeightSpec::sigma_or_identity(Index n) const {
  if (sigma.dim() == 0) return SymMat::Identity(n);
  if (sigma.dim() != n) {
    throw DimensionError("weight sigma is " + std::to_string(sigma.dim()) + "x" +
                         std::to_string(sigma.dim()) + ", state dimension is " + std::to_string(n));
  }
  return sigma;
}

double predictive_cost(const Mat& A, const Mat& B, const Mat& L, const SymMat& P,
                       const SymMat& sigma, const SymMat& Q, const SymMat& R) {
  const Index n = A.rows();
  if (A.cols() != n || B.rows() != n || L.rows() != B.cols() || L.cols() != n || P.dim() != n ||
      Q.dim() != n || sigma.dim() != n || R.dim() != B.cols()) {
    throw DimensionError("predictive_cost: inconsistent dimensions");
  }
  const Mat closed = A - B * L;
  const Mat inner =
      closed.transpose() * P.matrix() * closed + Q.matrix() + L.transpose() * R.matrix() * L;
  return (inner * sigma.matrix()).trace();
}

Vec predictive_costs(const SampleBank& bank, const Mat& L, const SymMat& P, const SymMat& sigma,
                     const SymMat& Q, const SymMat& R) {
  const Index n = bank.n();
  const Index m = bank.m();
  if (L.rows() != m || L.cols() != n || P.dim() != n || sigma.dim() != n || Q.dim() != n ||
      R.dim() != m) {
    throw DimensionError("predictive_costs: inconsistent dimensions");
  }
  // vec(A - B L) = T Lambda with T = [I, -(L^T kron I_n)], and
  // tr(M^T P M Sigma) = vec(M)^T (Sigma kron P) vec(M).
  Mat T(n * n, n * (n + m));
  T.leftCols(n * n).setIdentity();
  T.rightCols(n * m) = -kron(L.transpose(), Mat::Identity(n, n));
  const Mat K = T.transpose() * kron(sigma.matrix(), P.matrix()) * T;
  const double offset =
      ((Q.matrix() + L.transpose() * R.matrix() * L) * sigma.matrix()).trace();
  const Mat& params = bank.params();
  const Mat KP = K * params;
  Vec costs = params.cwiseProduct(KP).colwise().sum().transpose();
  costs.array() += offset;
  return costs;
}

double raw_weight(const WeightSpec& spec, double cost, double mean_cost) {
  const double theta = spec.effective_theta();
  switch (spec.family) {
    case WeightFamily::RiskNeutral:
      return 1.0;
    case WeightFamily::RSL: {
      const double e = theta * cost;
      if (e > kMaxWeightExponent) {
        throw WeightOverflow("RSL weight overflow: theta*J_E = " + std::to_string(e) +
                                 " exceeds " + std::to_string(kMaxWeightExponent),
                             e);
      }
      return std::exp(e);
    }
    case WeightFamily::RRSL: {
      // theta / (1 + exp(-x)) evaluated without overflow on either side.
      const double x = spec.alpha * cost - spec.beta * mean_cost;
      const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      return 1.0 + theta * s;
    }
  }
  return 1.0;
}

double raw_weight(const WeightSpec& spec, const Mat& A, const Mat& B, const Mat& L, const SymMat& P,
                  const SymMat& Q, const SymMat& R, double mean_cost) {
  const double cost = predictive_cost(A, B, L, P, spec.sigma_or_identity(A.rows()), Q, R);
  return raw_weight(spec, cost, mean_cost);
}

Vec normalize_weights(const Vec& raw) {
  double total = 0.0;
  for (Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw(i)) || raw(i) < 0.0) {
      throw NonFiniteValue("raw weight is not a finite nonnegative number at sample " +
                               std::to_string(i),
                           static_cast<std::size_t>(i));
    }
    total += raw(i);
  }
  if (!(total > 0.0)) throw NumericalError("all raw weights are zero; cannot normalize");
  return raw / (total / static_cast<double>(raw.size()));
}

WeightedBank::WeightedBank(std::shared_ptr<const SampleBank> bank, Vec costs, Vec raw, Vec weights,
                           SymMat P, Mat L, WeightSpec spec)
    : bank_(std::move(bank)),
      costs_(std::move(costs)),
      raw_(std::move(raw)),
      weights_(std::move(weights)),
      P_(std::move(P)),
      L_(std::move(L)),
      spec_(std::move(spec)) {}

WeightedBank build_weighted_bank(std::shared_ptr<const SampleBank> bank, const WeightSpec& spec,
                                 const Mat& L, const SymMat& P, const SymMat& Q, const SymMat& R) {
  if (!bank) throw DimensionError("build_weighted_bank: null bank");
  const Index count = bank->size();
  const double theta = spec.effective_theta();

  Vec costs = predictive_costs(*bank, L, P, spec.sigma_or_identity(bank->n()), Q, R);
  if (theta == 0.0) {
    // Every family reduces to w = 1 at theta = 0.
    Vec ones = Vec::Ones(count);
    return WeightedBank(std::move(bank), std::move(costs), ones, ones, P, L, spec);
  }

  double mean_cost = 0.0;
  for (Index i = 0; i < count; ++i) {
    if (!std::isfinite(costs(i))) {
      throw NonFiniteValue("J_E is not finite at sample " + std::to_string(i),
                           static_cast<std::size_t>(i));
    }
    mean_cost += costs(i);
  }
  mean_cost /= static_cast<double>(count);

  Vec raw(count);
  for (Index i = 0; i < count; ++i) raw(i) = raw_weight(spec, costs(i), mean_cost);
  Vec weights = normalize_weights(raw);
  return WeightedBank(std::move(bank), std::move(costs), std::move(raw), std::move(weights), P, L,
                      spec);
}

Mat weighted_expect(const WeightedBank& wbank, const ParamFunction& phi) {
  const SampleBank& bank = wbank.bank();
  Mat acc;
  for (Index i = 0; i < bank.size(); ++i) {
    Mat v = phi(bank.A(i), bank.B(i));
    if (!v.allFinite()) {
      throw NonFiniteValue("weighted_expect: non-finite value at sample " + std::to_string(i),
                           static_cast<std::size_t>(i));
    }
    if (i == 0) {
      acc = wbank.weights()(i) * v;
    } else {
      if (v.rows() != acc.rows() || v.cols() != acc.cols()) {
        throw DimensionError("weighted_expect: function changed shape at sample " +
                             std::to_string(i));
      }
      acc += wbank.weights()(i) * v;
    }
  }
  return acc / static_cast<double>(bank.size());
}

void write_weights_csv(const WeightedBank& wbank, std::ostream& os) {
  os << "sample,J_E,raw_weight,weight\n";
  for (Index i = 0; i < wbank.weights().size(); ++i) {
    os << i << ',' << format_double(wbank.costs()(i)) << ','
       << format_double(wbank.raw_weights()(i)) << ',' << format_double(wbank.weights()(i))
       << '\n';
  }
}

}  // namespace wsrctrl
