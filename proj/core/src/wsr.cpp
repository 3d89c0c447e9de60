#include "wsrctrl/wsr.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wsrctrl/error.hpp"

namespace wsrctrl {

DesignProblem::DesignProblem(std::shared_ptr<const SampleBank> bank, SymMat Q, SymMat R,
                             WeightSpec weight)
    : bank_(std::move(bank)), Q_(std::move(Q)), R_(std::move(R)), weight_(std::move(weight)) {
  if (!bank_) throw ConfigError("design problem: no sample bank");
  if (Q_.dim() != bank_->n()) {
    throw ConfigError("design problem: Q is " + std::to_string(Q_.dim()) + "x" +
                      std::to_string(Q_.dim()) + ", expected n=" + std::to_string(bank_->n()));
  }
  if (R_.dim() != bank_->m()) {
    throw ConfigError("design problem: R is " + std::to_string(R_.dim()) + "x" +
                      std::to_string(R_.dim()) + ", expected m=" + std::to_string(bank_->m()));
  }
  require_finite(Q_.matrix(), "Q");
  require_finite(R_.matrix(), "R");
  if (!(Q_.min_eigenvalue() > 0.0)) throw ConfigError("design problem: Q must be positive definite");
  if (!(R_.min_eigenvalue() > 0.0)) throw ConfigError("design problem: R must be positive definite");
  // Validates sigma's shape early.
  weight_.sigma = weight_.sigma_or_identity(bank_->n());
  if (weight_.sigma.min_eigenvalue() < -1e-12 * std::max(1.0, weight_.sigma.max_eigenvalue())) {
    throw ConfigError("design problem: weight sigma must be positive semidefinite");
  }
}

DesignProblem DesignProblem::with_theta(double theta) const {
  DesignProblem p = *this;
  p.weight_.theta = theta;
  return p;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::FixedPoint:
      return "fixed-point";
    case Method::Newton:
      return "newton";
    case Method::NewtonContinuation:
      return "newton-continuation";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "fixed-point") return Method::FixedPoint;
  if (name == "newton") return Method::Newton;
  if (name == "newton-continuation") return Method::NewtonContinuation;
  throw ConfigError("unknown solver method '" + std::string(name) +
                    "' (expected fixed-point, newton or newton-continuation)");
}

WeightedTerms weighted_terms(const SymMat& P, const Mat& L, const DesignProblem& problem) {
  const Index n = problem.n();
  const Index m = problem.m();
  if (P.dim() != n || L.rows() != m || L.cols() != n) {
    throw DimensionError("weighted_terms: P must be nxn and L mxn");
  }
  const WeightedBank wb =
      build_weighted_bank(problem.bank_ptr(), problem.weight(), L, P, problem.Q(), problem.R());
  const Mat moment = second_moment(problem.bank(), wb.weights());
  WeightedTerms t;
  t.apa = bilinear_expect(moment, n, m, Block::A, P.matrix(), Block::A);
  t.apb = bilinear_expect(moment, n, m, Block::A, P.matrix(), Block::B);
  t.bpb_r = bilinear_expect(moment, n, m, Block::B, P.matrix(), Block::B) + problem.R().matrix();
  return t;
}

namespace {

Mat gain_from_terms(const WeightedTerms& t, const DesignProblem& problem) {
  const SymMat inner(t.bpb_r);
  const double min_eig = inner.min_eigenvalue();
  const double scale = problem.R().max_eigenvalue();
  if (!(min_eig >= 1e-12 * scale)) {
    throw DomainViolation("E_w[B^T P B + R] is not positive definite (smallest eigenvalue " +
                              std::to_string(min_eig) + ")",
                          min_eig);
  }
  return inner.matrix().ldlt().solve(t.apb.transpose());
}

// h at (P, L) from terms already evaluated there.
Vec residual_from_terms(const WeightedTerms& t, const SymMat& P, const Mat& L,
                        const DesignProblem& problem) {
  const Mat cross = t.apb * L;
  const Mat f = t.apa - cross - cross.transpose() + L.transpose() * t.bpb_r * L +
                problem.Q().matrix() - P.matrix();
  const Mat g = t.bpb_r * L - t.apb.transpose();
  Vec h(f.rows() * (f.rows() + 1) / 2 + g.size());
  h << vech(SymMat(f)), vec(g);
  return h;
}

}  // namespace

Mat gain_map(const SymMat& P, const Mat& L, const DesignProblem& problem) {
  return gain_from_terms(weighted_terms(P, L, problem), problem);
}

SymMat value_map(const SymMat& P, const Mat& L, const DesignProblem& problem) {
  const WeightedTerms t = weighted_terms(P, L, problem);
  const Mat G = gain_from_terms(t, problem);
  return SymMat(t.apa + problem.Q().matrix() - t.apb * G);
}

Vec pack(const SymMat& P, const Mat& L) {
  const Vec vp = vech(P);
  const Vec vl = vec(L);
  Vec z(vp.size() + vl.size());
  z << vp, vl;
  return z;
}

void unpack(const Eigen::Ref<const Vec>& z, Index n, Index m, SymMat& P, Mat& L) {
  const Index np = n * (n + 1) / 2;
  if (z.size() != np + n * m) {
    throw DimensionError("unpack: z has length " + std::to_string(z.size()) + ", expected " +
                         std::to_string(np + n * m));
  }
  P = unvech(z.head(np), n);
  L = unvec(z.tail(n * m), m, n);
}

Vec implicit_h(const Eigen::Ref<const Vec>& z, const DesignProblem& problem) {
  SymMat P;
  Mat L;
  unpack(z, problem.n(), problem.m(), P, L);
  return residual_from_terms(weighted_terms(P, L, problem), P, L, problem);
}

namespace {

Mat finite_difference_jacobian(const Eigen::Ref<const Vec>& z, const DesignProblem& problem) {
  const double step_base = std::cbrt(std::numeric_limits<double>::epsilon());
  const Index dim = z.size();
  Mat jac(dim, dim);
  Vec probe = z;
  for (Index j = 0; j < dim; ++j) {
    const double h = step_base * std::max(1.0, std::abs(z(j)));
    probe(j) = z(j) + h;
    const Vec up = implicit_h(probe, problem);
    probe(j) = z(j) - h;
    const Vec down = implicit_h(probe, problem);
    probe(j) = z(j);
    // Use the actually representable spacing.
    const double span = (z(j) + h) - (z(j) - h);
    jac.col(j) = (up - down) / span;
  }
  return jac;
}

Mat analytic_jacobian_theta0(const Eigen::Ref<const Vec>& z, const DesignProblem& problem) {
  if (problem.weight().effective_theta() != 0.0) {
    throw ConfigError("analytic Jacobian is only available at theta = 0");
  }
  const Index n = problem.n();
  const Index m = problem.m();
  const Index np = n * (n + 1) / 2;
  SymMat P;
  Mat L;
  unpack(z, n, m, P, L);
  const SampleBank& bank = problem.bank();
  const Mat dup = duplication_matrix(n);

  const Mat kron_closed = expect(bank, [&](const Mat& A, const Mat& B) {
    const Mat mt = (A - B * L).transpose();
    return kron(mt, mt);
  });
  const Mat kron_cross = expect(bank, [&](const Mat& A, const Mat& B) {
    return kron((A - B * L).transpose(), B.transpose());
  });
  const Mat bpb_r = expect(bank, [&](const Mat&, const Mat& B) {
    return Mat(B.transpose() * P.matrix() * B);
  }) + problem.R().matrix();
  const Mat bpa = expect(bank, [&](const Mat& A, const Mat& B) {
    return Mat(B.transpose() * P.matrix() * A);
  });
  const Mat c = bpb_r * L - bpa;  // m x n

  Mat jac = Mat::Zero(np + m * n, np + m * n);
  jac.topLeftCorner(np, np) = compress(kron_closed) - Mat::Identity(np, np);
  // d f / d L_ij = vech(E_ij^T C + C^T E_ij), column index i + j m.
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      Mat e = Mat::Zero(m, n);
      e(i, j) = 1.0;
      const Mat d = e.transpose() * c + c.transpose() * e;
      jac.block(0, np + i + j * m, np, 1) = vech(d);
    }
  }
  jac.bottomLeftCorner(m * n, np) = -kron_cross * dup;
  jac.bottomRightCorner(m * n, m * n) = kron(Mat::Identity(n, n), bpb_r);
  return jac;
}

}  // namespace

Mat jacobian_h(const Eigen::Ref<const Vec>& z, const DesignProblem& problem, JacobianMode mode) {
  if (mode == JacobianMode::AnalyticThetaZero) return analytic_jacobian_theta0(z, problem);
  return finite_difference_jacobian(z, problem);
}

WsrSolution iterate_wsr(const DesignProblem& problem, const SymMat& P0, const Mat& L0,
                        const SolverOptions& options, const TraceSink& trace) {
  const Index n = problem.n();
  const Index m = problem.m();
  if (P0.dim() != n || L0.rows() != m || L0.cols() != n) {
    throw DimensionError("iterate_wsr: initial P must be nxn and L mxn");
  }
  const double p0_min = P0.min_eigenvalue();
  if (p0_min < -1e-12 * std::max(1.0, P0.max_eigenvalue())) {
    throw DomainViolation("iterate_wsr: initial P is not positive semidefinite", p0_min);
  }

  WsrSolution sol;
  sol.method = Method::FixedPoint;
  sol.theta = problem.theta();
  SymMat P = P0;
  Mat L = L0;
  bool converged = false;
  for (int s = 0; s < options.max_fixed_point_iters; ++s) {
    const WeightedTerms t = weighted_terms(P, L, problem);
    const Mat G = gain_from_terms(t, problem);
    const SymMat F(t.apa + problem.Q().matrix() - t.apb * G);
    if (!F.matrix().allFinite() || !G.allFinite()) {
      throw NonFiniteValue("iterate_wsr: non-finite iterate at s=" + std::to_string(s + 1),
                           static_cast<std::size_t>(s + 1));
    }
    const double delta = (F.matrix() - P.matrix()).norm() + (G - L).norm();
    sol.history.push_back(delta);
    if (trace) trace(TraceRow{s, P, L, delta, residual_from_terms(t, P, L, problem).norm()});
    P = F;
    L = G;
    sol.iterations = s + 1;
    if (delta < options.fixed_point_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "WSR difference equations did not converge within " << options.max_fixed_point_iters
        << " iterations (last delta " << (sol.history.empty() ? 0.0 : sol.history.back()) << ")";
    throw ConvergenceFailure(msg.str(), std::move(sol.history));
  }
  sol.P = P;
  sol.L = L;
  sol.residual = implicit_h(pack(P, L), problem).norm();
  if (trace) {
    trace(TraceRow{sol.iterations, P, L, std::numeric_limits<double>::quiet_NaN(), sol.residual});
  }
  return sol;
}

WsrSolution newton_solve(const DesignProblem& problem, const Eigen::Ref<const Vec>& z0,
                         const SolverOptions& options) {
  const Index n = problem.n();
  const Index m = problem.m();
  WsrSolution sol;
  sol.method = Method::Newton;
  sol.theta = problem.theta();

  Vec z = z0;
  Vec h = implicit_h(z, problem);
  double norm = h.norm();
  sol.history.push_back(norm);
  int iter = 0;
  while (!(norm < options.newton_tol)) {
    if (iter >= options.max_newton_iters) {
      throw ConvergenceFailure("Newton's method did not converge within " +
                                   std::to_string(options.max_newton_iters) +
                                   " iterations (residual " + std::to_string(norm) + ")",
                               std::move(sol.history));
    }
    const Mat jac = jacobian_h(z, problem, options.jacobian);
    Eigen::PartialPivLU<Mat> lu(jac);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      throw SingularJacobian("Newton: Jacobian is singular to working precision (rcond " +
                                 std::to_string(rcond) + ")",
                             rcond);
    }
    const Vec step = lu.solve(h);

    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
      const Vec trial = z - t * step;
      Vec trial_h;
      try {
        trial_h = implicit_h(trial, problem);
      } catch (const NumericalError&) {
        continue;  // left the domain; shorten the step
      }
      const double trial_norm = trial_h.norm();
      if (std::isfinite(trial_norm) && trial_norm < norm) {
        z = trial;
        h = std::move(trial_h);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    ++iter;
    sol.history.push_back(norm);
    if (!accepted) {
      throw ConvergenceFailure("Newton: no decrease of ||h|| after " +
                                   std::to_string(options.max_halvings) + " step halvings",
                               std::move(sol.history));
    }
  }
  unpack(z, n, m, sol.P, sol.L);
  sol.iterations = iter;
  sol.residual = norm;
  const double p_min = sol.P.min_eigenvalue();
  if (!(p_min > 0.0)) {
    throw DomainViolation("Newton converged to a root with P not positive definite", p_min);
  }
  return sol;
}

WsrSolution solve(const DesignProblem& problem, const SolverOptions& options,
                  const TraceSink& trace) {
  const Index n = problem.n();
  const Index m = problem.m();
  switch (options.method) {
    case Method::FixedPoint:
      return iterate_wsr(problem, SymMat::Zero(n), Mat::Zero(m, n), options, trace);
    case Method::Newton: {
      const WsrSolution base =
          iterate_wsr(problem.with_theta(0.0), SymMat::Zero(n), Mat::Zero(m, n), options);
      WsrSolution sol = newton_solve(problem, pack(base.P, base.L), options);
      sol.method = Method::Newton;
      return sol;
    }
    case Method::NewtonContinuation: {
      const WsrSolution base =
          iterate_wsr(problem.with_theta(0.0), SymMat::Zero(n), Mat::Zero(m, n), options);
      const int steps = std::max(1, options.continuation_steps);
      Vec z = pack(base.P, base.L);
      WsrSolution sol;
      int total = 0;
      std::vector<double> history;
      for (int k = 1; k <= steps; ++k) {
        const double theta =
            k == steps ? problem.theta() : problem.theta() * static_cast<double>(k) / steps;
        sol = newton_solve(problem.with_theta(theta), z, options);
        z = pack(sol.P, sol.L);
        total += sol.iterations;
        history.insert(history.end(), sol.history.begin(), sol.history.end());
      }
      sol.method = Method::NewtonContinuation;
      sol.theta = problem.theta();
      sol.iterations = total;
      sol.history = std::move(history);
      return sol;
    }
  }
  throw ConfigError("unknown solver method");
}

}  // namespace wsrctrl
