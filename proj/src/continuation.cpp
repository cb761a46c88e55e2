#include "qgsw/continuation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qgsw/errors.hpp"

namespace qgsw::continuation {

using contour::FourierBoundary;
using contour::QuadratureGrid;
using spectrum::Branch;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

spectrum::EigenPair require_bifurcation(int m, double lambda, double b, const char* who) {
  if (m < 2) throw PreconditionError(std::string(who) + ": fold m must be >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError(std::string(who) + ": lambda must be a positive finite real");
  }
  if (!(b > 0.0 && b < 1.0)) throw DomainError(std::string(who) + ": b must lie inside (0,1)");
  const double delta = spectrum::discriminant(m, lambda, b);
  if (!(delta > 0.0)) {
    throw PreconditionError(std::string(who) + ": discriminant Delta_" + std::to_string(m) +
                            " = " + fmt(delta) + " is not positive at lambda=" + fmt(lambda) +
                            ", b=" + fmt(b));
  }
  return *spectrum::eigenvalues(m, lambda, b);
}

// Projected m-fold system. Unknowns: a_{mk-1} (k = 2..K), b_{mk-1} (k = 1..K), Omega.
class System {
 public:
  System(double lambda, double b, int m, int trunc, double s, const QuadratureGrid& grid)
      : lambda_(lambda), b_(b), m_(m), k_(trunc), s_(s), grid_(grid) {
    const int p = grid.size();
    sines_.resize(static_cast<std::size_t>(k_) * p);
    for (int k = 1; k <= k_; ++k) {
      for (int j = 0; j < p; ++j) {
        sines_[static_cast<std::size_t>(k - 1) * p + j] = std::sin(m_ * k * grid.angle(j));
      }
    }
  }

  int size() const { return 2 * k_; }

  VectorXd pack(const BranchPoint& pt) const {
    VectorXd x(size());
    for (int k = 2; k <= k_; ++k) x[k - 2] = pt.f1.coefficient(m_ * k - 1);
    for (int k = 1; k <= k_; ++k) x[k_ - 2 + k] = pt.f2.coefficient(m_ * k - 1);
    x[size() - 1] = pt.omega;
    return x;
  }

  void unpack(const VectorXd& x, FourierBoundary& f1, FourierBoundary& f2, double& omega) const {
    std::vector<double> c1(static_cast<std::size_t>(m_) * k_, 0.0);
    std::vector<double> c2(c1.size(), 0.0);
    c1[m_ - 1] = s_;
    for (int k = 2; k <= k_; ++k) c1[m_ * k - 1] = x[k - 2];
    for (int k = 1; k <= k_; ++k) c2[m_ * k - 1] = x[k_ - 2 + k];
    f1 = FourierBoundary(1.0, std::move(c1));
    f2 = FourierBoundary(b_, std::move(c2));
    omega = x[size() - 1];
  }

  // Projections of G_1, G_2 on sin(mk theta); max node |G| through `node_max`.
  VectorXd residual(const VectorXd& x, double* node_max = nullptr) const {
    FourierBoundary f1(1.0), f2(b_);
    double omega = 0.0;
    unpack(x, f1, f2, omega);
    contour::ContourOptions opts;
    opts.fold = m_;
    const contour::GValues g = contour::g_functional(lambda_, b_, omega, f1, f2, grid_, opts);
    const int p = grid_.size();
    VectorXd f(size());
    for (int k = 1; k <= k_; ++k) {
      const double* row = &sines_[static_cast<std::size_t>(k - 1) * p];
      double s1 = 0.0, s2 = 0.0;
      for (int j = 0; j < p; ++j) {
        s1 += g.g1[j] * row[j];
        s2 += g.g2[j] * row[j];
      }
      f[k - 1] = 2.0 * s1 / p;
      f[k_ + k - 1] = 2.0 * s2 / p;
    }
    if (node_max) *node_max = g.max_abs();
    return f;
  }

  MatrixXd jacobian(const VectorXd& x, double rel_step) const {
    const double h = rel_step * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    MatrixXd j(size(), size());
    for (int c = 0; c < size(); ++c) {
      VectorXd xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      j.col(c) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    return j;
  }

 private:
  double lambda_, b_;
  int m_, k_;
  double s_;
  const QuadratureGrid& grid_;
  std::vector<double> sines_;
};

BranchPoint solve_fixed_trunc(double lambda, double b, int m, double s, const BranchPoint& guess,
                              int trunc, const QuadratureGrid& grid, const SolverOptions& opt) {
  const System sys(lambda, b, m, trunc, s, grid);
  VectorXd x = sys.pack(guess);
  double node_max = 0.0;
  VectorXd f = sys.residual(x, &node_max);
  int it = 0;
  for (;; ++it) {
    if (node_max <= 0.1 * opt.tol) break;
    if (it >= opt.max_iterations) {
      throw NonConvergence("newton_solve: iteration cap reached at s=" + fmt(s) +
                           " with residual " + fmt(node_max));
    }
    const MatrixXd jac = sys.jacobian(x, opt.fd_relative_step);
    const Eigen::JacobiSVD<MatrixXd> svd(jac);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0) || sv[0] / smin > opt.condition_limit) {
      throw DegenerateJacobian("newton_solve: Jacobian condition estimate " +
                               fmt(smin > 0.0 ? sv[0] / smin : INFINITY) + " at s=" + fmt(s));
    }
    const VectorXd dx = jac.colPivHouseholderQr().solve(-f);

    double step = 1.0;
    bool accepted = false;
    VectorXd x_new, f_new;
    double nm_new = 0.0;
    for (int h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
      x_new = x + step * dx;
      try {
        f_new = sys.residual(x_new, &nm_new);
      } catch (const BallGuardViolation&) {
        continue;
      } catch (const InterfaceCollision&) {
        continue;
      }
      if (f_new.norm() < f.norm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (node_max <= opt.tol) break;
      throw NonConvergence("newton_solve: step damping exhausted at s=" + fmt(s) +
                           " with residual " + fmt(node_max));
    }
    const bool stalled =
        (step * dx).lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    x = x_new;
    f = f_new;
    node_max = nm_new;
    if (stalled && node_max <= opt.tol) break;
  }
  if (!(node_max <= opt.tol)) {
    throw NonConvergence("newton_solve: residual " + fmt(node_max) + " above tolerance at s=" +
                         fmt(s));
  }
  BranchPoint pt;
  pt.fold = m;
  pt.s = s;
  sys.unpack(x, pt.f1, pt.f2, pt.omega);
  pt.residual = node_max;
  pt.node_count = grid.size();
  pt.iterations = it;
  return pt;
}

}  // namespace

int solver_node_count(int requested, int m, int trunc) {
  const int need = std::max(requested, 4 * m * trunc);
  const int unit = 2 * m;
  return ((need + unit - 1) / unit) * unit;
}

BranchPoint annulus_point(double lambda, double b, int m, Branch sign) {
  const auto e = require_bifurcation(m, lambda, b, "annulus_point");
  BranchPoint pt;
  pt.fold = m;
  pt.s = 0.0;
  pt.omega = e.omega(sign);
  pt.f1 = FourierBoundary(1.0);
  pt.f2 = FourierBoundary(b);
  return pt;
}

BranchPoint newton_solve(double lambda, double b, int m, Branch sign, double s,
                         const std::optional<BranchPoint>& initial_guess,
                         const QuadratureGrid& grid, const SolverOptions& options) {
  const auto e = require_bifurcation(m, lambda, b, "newton_solve");
  if (e.degenerate) throw PreconditionError("newton_solve: degenerate eigenvalue pair");
  if (!std::isfinite(s) || std::abs(s) * m >= 0.5) {
    throw PreconditionError("newton_solve: amplitude s=" + fmt(s) + " violates the ball guard");
  }
  if (options.trunc < 1) throw PreconditionError("newton_solve: trunc must be >= 1");

  int trunc = options.trunc;
  QuadratureGrid solve_grid(solver_node_count(grid.size(), m, trunc));

  if (s == 0.0) {
    BranchPoint pt = annulus_point(lambda, b, m, sign);
    contour::ContourOptions opts;
    opts.fold = m;
    pt.residual = contour::g_functional(lambda, b, pt.omega, pt.f1, pt.f2, solve_grid, opts)
                      .max_abs();
    pt.node_count = solve_grid.size();
    return pt;
  }

  BranchPoint guess;
  if (initial_guess && initial_guess->fold == m) {
    guess = *initial_guess;
  } else {
    const auto v = spectrum::kernel_vector(m, lambda, b, sign);
    guess = annulus_point(lambda, b, m, sign);
    guess.f2.set_coefficient(m - 1, s * v[1] / v[0]);
  }
  guess.f1.set_coefficient(m - 1, s);

  for (;;) {
    BranchPoint pt = solve_fixed_trunc(lambda, b, m, s, guess, trunc, solve_grid, options);
    const double tail = std::max(std::abs(pt.f1.coefficient(m * trunc - 1)),
                                 std::abs(pt.f2.coefficient(m * trunc - 1)));
    if (tail <= options.truncation_threshold || 2 * trunc > options.max_trunc) return pt;
    trunc *= 2;
    solve_grid = QuadratureGrid(solver_node_count(solve_grid.size(), m, trunc));
    guess = pt;
  }
}

BranchTrace trace_branch(double lambda, double b, int m, Branch sign, double s_max, int steps,
                         const QuadratureGrid& grid, const SolverOptions& options) {
  const auto e = require_bifurcation(m, lambda, b, "trace_branch");
  if (steps < 1) throw PreconditionError("trace_branch: steps must be >= 1");
  if (!(s_max > 0.0)) throw PreconditionError("trace_branch: s_max must be positive");

  BranchTrace trace;
  trace.fold = m;
  trace.sign = sign;
  trace.omega_bifurcation = e.omega(sign);

  std::optional<BranchPoint> prev;
  for (int k = 1; k <= steps; ++k) {
    const double s = s_max * k / steps;
    std::optional<BranchPoint> guess;
    if (prev) {
      // Mode mk - 1 scales like s^k near the bifurcation point.
      BranchPoint g = *prev;
      const double ratio = s / prev->s;
      for (int j = 1; m * j - 1 < static_cast<int>(g.f1.coefficients().size()) ||
                      m * j - 1 < static_cast<int>(g.f2.coefficients().size());
           ++j) {
        const double f = std::pow(ratio, j);
        g.f1.set_coefficient(m * j - 1, g.f1.coefficient(m * j - 1) * f);
        g.f2.set_coefficient(m * j - 1, g.f2.coefficient(m * j - 1) * f);
      }
      guess = g;
    }
    try {
      prev = newton_solve(lambda, b, m, sign, s, guess, grid, options);
    } catch (const NonConvergence& ex) {
      trace.termination = ex.what();
      return trace;
    } catch (const DegenerateJacobian& ex) {
      trace.termination = ex.what();
      return trace;
    } catch (const BallGuardViolation& ex) {
      trace.termination = ex.what();
      return trace;
    } catch (const PreconditionError& ex) {
      trace.termination = ex.what();
      return trace;
    } catch (const InterfaceCollision& ex) {
      trace.termination = ex.what();
      return trace;
    }
    trace.points.push_back(*prev);
  }
  trace.complete = true;
  trace.termination = "completed";
  return trace;
}

double extrapolate_omega(const std::vector<BranchPoint>& points, int count) {
  std::vector<BranchPoint> sorted(points);
  std::sort(sorted.begin(), sorted.end(),
            [](const BranchPoint& a, const BranchPoint& c) { return a.s < c.s; });
  const int n = std::min<int>(count, static_cast<int>(sorted.size()));
  if (n < 2) throw PreconditionError("extrapolate_omega: need at least two points");
  double ms = 0.0, mo = 0.0;
  for (int i = 0; i < n; ++i) {
    ms += sorted[i].s;
    mo += sorted[i].omega;
  }
  ms /= n;
  mo /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (sorted[i].s - ms) * (sorted[i].s - ms);
    sxy += (sorted[i].s - ms) * (sorted[i].omega - mo);
  }
  return mo - (sxy / sxx) * ms;
}

double tangent_angle(const BranchPoint& point, double lambda, double b, Branch sign) {
  const int m = point.fold;
  const auto v = spectrum::kernel_vector(m, lambda, b, sign);
  const double u0 = point.f1.coefficient(m - 1);
  const double u1 = point.f2.coefficient(m - 1);
  const double dot = u0 * v[0] + u1 * v[1];
  const double cross = u0 * v[1] - u1 * v[0];
  return std::atan2(std::abs(cross), std::abs(dot));
}

VStateReport verify_vstate(const BranchPoint& point, double lambda, double b,
                           const QuadratureGrid& grid) {
  VStateReport rep;
  rep.omega = point.omega;
  const int m = std::max(point.fold, 1);
  rep.symmetry_defect = point.f1.off_lattice_energy(m) + point.f2.off_lattice_energy(m);
  try {
    const QuadratureGrid doubled(2 * grid.size());
    rep.residual =
        contour::g_functional(lambda, b, point.omega, point.f1, point.f2, doubled).max_abs();
  } catch (const BallGuardViolation&) {
    rep.residual = INFINITY;
  } catch (const InterfaceCollision&) {
    rep.residual = INFINITY;
  }
  return rep;
}

}  // namespace qgsw::continuation
