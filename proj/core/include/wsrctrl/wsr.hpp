#pragma once

// Weighted stochastic Riccati (WSR) equations
//
//   P = E_w[A^T P A] + Q - E_w[A^T P B] G(P, L)
//   L = G(P, L) = E_w[B^T P B + R]^{-1} E_w[B^T P A]
//
// where E_w is the weighted expectation over the problem's sample bank with
// weights evaluated at (P, L). Solved either by iterating the maps (the WSR
// difference equations) or by Newton's method on the stacked residual
// h(z) = [f(z); g(z)], z = [vech(P); vec(L)].

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/matops.hpp"
#include "wsrctrl/weights.hpp"

namespace wsrctrl {

// Bank, cost weights and weight family for one design. Q and R must be
// positive definite.
class DesignProblem {
 public:
  DesignProblem(std::shared_ptr<const SampleBank> bank, SymMat Q, SymMat R, WeightSpec weight);

  const SampleBank& bank() const { return *bank_; }
  const std::shared_ptr<const SampleBank>& bank_ptr() const { return bank_; }
  const SymMat& Q() const { return Q_; }
  const SymMat& R() const { return R_; }
  const WeightSpec& weight() const { return weight_; }
  double theta() const { return weight_.theta; }
  Index n() const { return bank_->n(); }
  Index m() const { return bank_->m(); }

  DesignProblem with_theta(double theta) const;

 private:
  std::shared_ptr<const SampleBank> bank_;
  SymMat Q_;
  SymMat R_;
  WeightSpec weight_;
};

enum class Method { FixedPoint, Newton, NewtonContinuation };
enum class JacobianMode { FiniteDifference, AnalyticThetaZero };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);  // fixed-point | newton | newton-continuation

struct SolverOptions {
  Method method = Method::FixedPoint;
  double fixed_point_tol = 1e-10;
  double newton_tol = 1e-9;
  int max_fixed_point_iters = 10000;
  int max_newton_iters = 100;
  int max_halvings = 30;
  // NewtonContinuation walks theta through k/steps * theta, k = 1..steps.
  int continuation_steps = 2;
  JacobianMode jacobian = JacobianMode::FiniteDifference;
};

struct WsrSolution {
  SymMat P;
  Mat L;
  Method method = Method::FixedPoint;
  double theta = 0.0;
  int iterations = 0;
  double residual = 0.0;
  // Fixed point: ||P_{s+1} - P_s||_F + ||L_{s+1} - L_s||_F per iteration.
  // Newton: ||h|| at each iterate, starting with the initial guess.
  std::vector<double> history;
};

struct TraceRow {
  int iteration = 0;
  SymMat P;
  Mat L;
  double delta = 0.0;
  double residual = 0.0;
};
using TraceSink = std::function<void(const TraceRow&)>;

// E_w[A^T P A], E_w[A^T P B] and E_w[B^T P B] + R with weights built at (P, L).
struct WeightedTerms {
  Mat apa;
  Mat apb;
  Mat bpb_r;
};
WeightedTerms weighted_terms(const SymMat& P, const Mat& L, const DesignProblem& problem);

// The map G. Throws DomainViolation when E_w[B^T P B + R] is not safely
// positive definite.
Mat gain_map(const SymMat& P, const Mat& L, const DesignProblem& problem);
// The map F, symmetrized.
SymMat value_map(const SymMat& P, const Mat& L, const DesignProblem& problem);

Vec pack(const SymMat& P, const Mat& L);
void unpack(const Eigen::Ref<const Vec>& z, Index n, Index m, SymMat& P, Mat& L);

Vec implicit_h(const Eigen::Ref<const Vec>& z, const DesignProblem& problem);
Mat jacobian_h(const Eigen::Ref<const Vec>& z, const DesignProblem& problem, JacobianMode mode);

// Iterates (P, L) <- (F(P, L), G(P, L)) from (P0, L0) until the Frobenius
// step falls below options.fixed_point_tol.
WsrSolution iterate_wsr(const DesignProblem& problem, const SymMat& P0, const Mat& L0,
                        const SolverOptions& options, const TraceSink& trace = {});

// Damped Newton on h from z0, stopping when ||h|| < options.newton_tol.
WsrSolution newton_solve(const DesignProblem& problem, const Eigen::Ref<const Vec>& z0,
                         const SolverOptions& options);

// Dispatches on options.method. Newton variants start from the theta = 0
// solution obtained by the fixed-point iteration.
WsrSolution solve(const DesignProblem& problem, const SolverOptions& options,
                  const TraceSink& trace = {});

}  // namespace wsrctrl
