#include "qgsw/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qgsw/errors.hpp"
#include "qgsw/special_functions.hpp"

namespace qgsw::contour {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCollision = 1e-8;

double k0_kernel(double x) {
  if (x <= 2.0) {
    const special::LogSplit s = special::k0_log_split(x);
    return s.regular - std::log(0.5 * x) * s.i0;
  }
  return special::bessel_k(0, x);
}

void check_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError(std::string(who) + ": lambda must be a positive finite real");
  }
}

void check_b(double b, const char* who) {
  if (!(b > 0.0 && b < 1.0)) {
    throw DomainError(std::string(who) + ": b must lie strictly inside (0,1)");
  }
}

// S at targets j in [0, count), source samples integrated over the full grid.
void s_accumulate(double lambda, const ConformalSamples& src, const ConformalSamples& tgt,
                  const QuadratureGrid& grid, bool self, bool reverse, int count,
                  std::vector<cplx>& out) {
  const int p = grid.size();
  const double inv_p = 1.0 / p;
  const double log_half_lambda = std::log(0.5 * lambda);
  const auto& nodes = grid.nodes();

  std::vector<cplx> measure(p);
  for (int k = 0; k < p; ++k) {
    measure[k] = src.derivative[k] * (reverse ? std::conj(nodes[k]) : nodes[k]);
  }

  out.assign(count, cplx{});
  for (int j = 0; j < count; ++j) {
    const cplx zj = tgt.value[j];
    cplx acc{};
    if (self) {
      for (int k = 0; k < p; ++k) {
        if (k == j) {
          const double smooth =
              -log_half_lambda - std::log(std::abs(src.derivative[j])) - special::euler_gamma;
          acc += measure[k] * (grid.log_weight(0) + smooth * inv_p);
          continue;
        }
        const double r = std::abs(zj - src.value[k]);
        const double d = grid.chord(j - k);
        const special::LogSplit s = special::k0_log_split(lambda * r);
        const double smooth = s.regular - (log_half_lambda + std::log(r / d)) * s.i0;
        acc += measure[k] * (grid.log_weight(j - k) * s.i0 + smooth * inv_p);
      }
    } else {
      for (int k = 0; k < p; ++k) {
        const double r = std::abs(zj - src.value[k]);
        if (r < kCollision) {
          throw InterfaceCollision("s_integral: interfaces closer than 1e-8 at node " +
                                   std::to_string(j));
        }
        acc += measure[k] * (k0_kernel(lambda * r) * inv_p);
      }
    }
    out[j] = acc;
  }
}

}  // namespace

FourierBoundary::FourierBoundary(double scale, std::vector<double> coefficients)
    : scale_(scale), coefficients_(std::move(coefficients)) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("FourierBoundary: scale must be a positive finite real");
  }
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw DomainError("FourierBoundary: coefficients must be finite");
  }
}

FourierBoundary FourierBoundary::single_mode(double scale, int index, double amplitude) {
  if (index < 0) throw PreconditionError("FourierBoundary: index must be >= 0");
  std::vector<double> c(static_cast<std::size_t>(index) + 1, 0.0);
  c[index] = amplitude;
  return FourierBoundary(scale, std::move(c));
}

double FourierBoundary::coefficient(int n) const {
  if (n < 0 || n >= static_cast<int>(coefficients_.size())) return 0.0;
  return coefficients_[n];
}

void FourierBoundary::set_coefficient(int n, double value) {
  if (n < 0) throw PreconditionError("FourierBoundary: index must be >= 0");
  if (!std::isfinite(value)) throw DomainError("FourierBoundary: coefficients must be finite");
  if (n >= static_cast<int>(coefficients_.size())) coefficients_.resize(n + 1, 0.0);
  coefficients_[n] = value;
}

double FourierBoundary::ball_norm() const {
  double s = 0.0;
  for (std::size_t n = 0; n < coefficients_.size(); ++n) {
    s += std::abs(coefficients_[n]) * static_cast<double>(n + 1);
  }
  return s;
}

void FourierBoundary::validate() const {
  if (!within_ball()) {
    throw BallGuardViolation("FourierBoundary: sum |a_n|(n+1) = " + std::to_string(ball_norm()) +
                             " is not below scale/2 = " + std::to_string(0.5 * scale_));
  }
}

bool FourierBoundary::has_fold_symmetry(int m) const {
  if (m < 1) throw PreconditionError("has_fold_symmetry: fold must be >= 1");
  for (std::size_t n = 0; n < coefficients_.size(); ++n) {
    if ((n + 1) % m != 0 && coefficients_[n] != 0.0) return false;
  }
  return true;
}

double FourierBoundary::off_lattice_energy(int m) const {
  if (m < 1) throw PreconditionError("off_lattice_energy: fold must be >= 1");
  double e = 0.0;
  for (std::size_t n = 0; n < coefficients_.size(); ++n) {
    if ((n + 1) % m != 0) e += coefficients_[n] * coefficients_[n];
  }
  return e;
}

QuadratureGrid::QuadratureGrid(int node_count, double phase) : phase_(phase) {
  if (node_count < 4 || node_count % 2 != 0) {
    throw PreconditionError("QuadratureGrid: node count must be even and >= 4, got " +
                            std::to_string(node_count));
  }
  const int p = node_count;
  nodes_.resize(p);
  for (int k = 0; k < p; ++k) nodes_[k] = std::polar(1.0, angle(k));

  log_moments_.resize(p / 2);
  for (int n = 1; n <= p / 2; ++n) log_moments_[n - 1] = -1.0 / (2.0 * n);

  std::vector<double> cos_table(p);
  for (int k = 0; k < p; ++k) cos_table[k] = std::cos(kTwoPi * k / p);
  log_weights_.resize(p);
  for (int l = 0; l < p; ++l) {
    double s = 0.0;
    for (int n = p / 2 - 1; n >= 1; --n) {
      s -= 2.0 * log_moments_[n - 1] * cos_table[(static_cast<long>(n) * l) % p];
    }
    s -= log_moments_[p / 2 - 1] * ((l % 2 == 0) ? 1.0 : -1.0);
    log_weights_[l] = s / p;
  }

  chords_.resize(p);
  for (int l = 0; l < p; ++l) chords_[l] = 2.0 * std::abs(std::sin(std::numbers::pi * l / p));
}

double QuadratureGrid::angle(int k) const { return kTwoPi * k / size() + phase_; }

double QuadratureGrid::log_weight(int offset) const {
  const int p = size();
  return log_weights_[((offset % p) + p) % p];
}

double QuadratureGrid::chord(int offset) const {
  const int p = size();
  return chords_[((offset % p) + p) % p];
}

ConformalSamples conformal_eval(const FourierBoundary& boundary, const QuadratureGrid& grid) {
  boundary.validate();
  const auto& c = boundary.coefficients();
  const int p = grid.size();
  ConformalSamples out;
  out.value.resize(p);
  out.derivative.resize(p);
  for (int k = 0; k < p; ++k) {
    const cplx w = grid.nodes()[k];
    const cplx z = std::conj(w);
    cplx poly{};
    cplx dpoly{};
    for (std::size_t n = c.size(); n-- > 0;) {
      dpoly = dpoly * z + poly;
      poly = poly * z + c[n];
    }
    out.value[k] = boundary.scale() * w + poly;
    out.derivative[k] = boundary.scale() - z * z * dpoly;
  }
  return out;
}

std::vector<cplx> s_integral(double lambda, const FourierBoundary& source,
                             const FourierBoundary& target, const QuadratureGrid& grid) {
  check_lambda(lambda, "s_integral");
  const bool self = (source == target);
  const ConformalSamples src = conformal_eval(source, grid);
  const ConformalSamples tgt = self ? src : conformal_eval(target, grid);
  std::vector<cplx> out;
  s_accumulate(lambda, src, tgt, grid, self, false, grid.size(), out);
  return out;
}

double GValues::max_abs() const {
  double m = 0.0;
  for (double v : g1) m = std::max(m, std::abs(v));
  for (double v : g2) m = std::max(m, std::abs(v));
  return m;
}

GValues g_functional(double lambda, double b, double omega, const FourierBoundary& f1,
                     const FourierBoundary& f2, const QuadratureGrid& grid,
                     const ContourOptions& options) {
  check_lambda(lambda, "g_functional");
  check_b(b, "g_functional");
  if (f1.scale() != 1.0) throw PreconditionError("g_functional: outer interface scale must be 1");
  if (f2.scale() != b) throw PreconditionError("g_functional: inner interface scale must be b");
  const int p = grid.size();
  const int fold = options.fold;
  if (fold < 1 || p % fold != 0) {
    throw PreconditionError("g_functional: fold must divide the node count");
  }
  if (fold > 1 && !(f1.has_fold_symmetry(fold) && f2.has_fold_symmetry(fold))) {
    throw PreconditionError("g_functional: boundaries are not " + std::to_string(fold) +
                            "-fold symmetric");
  }

  const ConformalSamples c1 = conformal_eval(f1, grid);
  const ConformalSamples c2 = conformal_eval(f2, grid);
  const int count = p / fold;
  const bool rev = options.reverse_inner_orientation;

  std::vector<cplx> s21, s11, s22, s12;
  s_accumulate(lambda, c2, c1, grid, false, rev, count, s21);
  s_accumulate(lambda, c1, c1, grid, true, false, count, s11);
  s_accumulate(lambda, c2, c2, grid, true, rev, count, s22);
  s_accumulate(lambda, c1, c2, grid, false, false, count, s12);

  GValues g;
  g.g1.resize(p);
  g.g2.resize(p);
  for (int j = 0; j < count; ++j) {
    const cplx wbar = std::conj(grid.nodes()[j]);
    g.g1[j] = std::imag((omega * c1.value[j] + s21[j] - s11[j]) * wbar *
                        std::conj(c1.derivative[j]));
    g.g2[j] = std::imag((omega * c2.value[j] + s22[j] - s12[j]) * wbar *
                        std::conj(c2.derivative[j]));
  }
  for (int t = 1; t < fold; ++t) {
    std::copy_n(g.g1.begin(), count, g.g1.begin() + t * count);
    std::copy_n(g.g2.begin(), count, g.g2.begin() + t * count);
  }
  return g;
}

double sine_coefficient(std::span<const double> values, const QuadratureGrid& grid, int n) {
  double s = 0.0;
  for (int k = 0; k < grid.size(); ++k) s += values[k] * std::sin(n * grid.angle(k));
  return 2.0 * s / grid.size();
}

double cosine_coefficient(std::span<const double> values, const QuadratureGrid& grid, int n) {
  double s = 0.0;
  for (int k = 0; k < grid.size(); ++k) s += values[k] * std::cos(n * grid.angle(k));
  return 2.0 * s / grid.size();
}

double mean_value(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

ModeEnergy mode_energy(std::span<const double> values, const QuadratureGrid& grid, int fold) {
  if (fold < 1) throw PreconditionError("mode_energy: fold must be >= 1");
  const int p = grid.size();
  ModeEnergy e;
  const double mean = mean_value(values);
  e.mean = mean * mean;
  for (int n = 1; n <= p / 2; ++n) {
    double a = cosine_coefficient(values, grid, n);
    double s = sine_coefficient(values, grid, n);
    if (n == p / 2) {
      a *= 0.5;
      s = 0.0;
    }
    e.cosine += a * a;
    e.sine += s * s;
    if (n % fold != 0) e.off_lattice += a * a + s * s;
  }
  return e;
}

LinearizationReport linearization_check(int n, double lambda, double b, double omega,
                                        double epsilon, const QuadratureGrid& grid,
                                        const ContourOptions& options) {
  if (n < 1) throw PreconditionError("linearization_check: n must be >= 1");
  if (!(epsilon >= 1e-8 && epsilon <= 1e-4)) {
    throw PreconditionError("linearization_check: epsilon must lie in [1e-8, 1e-4]");
  }
  if (2 * n >= grid.size()) {
    throw PreconditionError("linearization_check: mode n is not resolved by the grid");
  }
  LinearizationReport rep;
  rep.analytic = spectrum::spectral_matrix(n, lambda, b, omega);

  const FourierBoundary outer(1.0);
  const FourierBoundary inner(b);
  ContourOptions opts = options;
  opts.fold = 1;

  for (int col = 0; col < 2; ++col) {
    const double scale = col == 0 ? 1.0 : b;
    const auto plus = FourierBoundary::single_mode(scale, n - 1, epsilon);
    const auto minus = FourierBoundary::single_mode(scale, n - 1, -epsilon);
    const GValues gp = col == 0 ? g_functional(lambda, b, omega, plus, inner, grid, opts)
                                : g_functional(lambda, b, omega, outer, plus, grid, opts);
    const GValues gm = col == 0 ? g_functional(lambda, b, omega, minus, inner, grid, opts)
                                : g_functional(lambda, b, omega, outer, minus, grid, opts);
    for (int row = 0; row < 2; ++row) {
      const auto& vp = row == 0 ? gp.g1 : gp.g2;
      const auto& vm = row == 0 ? gm.g1 : gm.g2;
      std::vector<double> diff(vp.size());
      for (std::size_t k = 0; k < vp.size(); ++k) diff[k] = (vp[k] - vm[k]) / (2.0 * epsilon);
      rep.recovered[row][col] = sine_coefficient(diff, grid, n) / n;

      double leak = std::abs(mean_value(diff));
      for (int k = 1; k < grid.size() / 2; ++k) {
        leak = std::max(leak, std::abs(cosine_coefficient(diff, grid, k)));
        if (k != n) leak = std::max(leak, std::abs(sine_coefficient(diff, grid, k)));
      }
      rep.leakage = std::max(rep.leakage, leak / n);
    }
  }
  const double a[2][2] = {{rep.analytic.m11, rep.analytic.m12},
                          {rep.analytic.m21, rep.analytic.m22}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.recovered[r][c] - a[r][c]));
    }
  }
  return rep;
}

cplx velocity_at(cplx z, const FourierBoundary& f1, const FourierBoundary& f2, double lambda,
                 double b, const QuadratureGrid& grid) {
  check_lambda(lambda, "velocity_at");
  check_b(b, "velocity_at");
  if (f1.scale() != 1.0 || f2.scale() != b) {
    throw PreconditionError("velocity_at: interface scales must be 1 and b");
  }
  const ConformalSamples c1 = conformal_eval(f1, grid);
  const ConformalSamples c2 = conformal_eval(f2, grid);
  const int p = grid.size();
  const cplx i{0.0, 1.0};
  cplx acc{};
  for (int k = 0; k < p; ++k) {
    const cplx tau = grid.nodes()[k];
    const double r1 = std::abs(z - c1.value[k]);
    const double r2 = std::abs(z - c2.value[k]);
    if (r1 < kCollision || r2 < kCollision) {
      throw NearBoundary("velocity_at: evaluation point lies on an interface");
    }
    acc += k0_kernel(lambda * r1) * c1.derivative[k] * i * tau;
    acc -= k0_kernel(lambda * r2) * c2.derivative[k] * i * tau;
  }
  return acc / static_cast<double>(p);
}

RefinedG g_functional_refined(double lambda, double b, double omega, const FourierBoundary& f1,
                              const FourierBoundary& f2, int start, double tol, int cap) {
  int p = start;
  GValues coarse = g_functional(lambda, b, omega, f1, f2, QuadratureGrid(p));
  for (;;) {
    const int fine_p = 2 * p;
    GValues fine = g_functional(lambda, b, omega, f1, f2, QuadratureGrid(fine_p));
    double change = 0.0;
    for (int k = 0; k < p; ++k) {
      change = std::max(change, std::abs(fine.g1[2 * k] - coarse.g1[k]));
      change = std::max(change, std::abs(fine.g2[2 * k] - coarse.g2[k]));
    }
    if (change < tol || fine_p >= cap) return {std::move(fine), fine_p, change};
    p = fine_p;
    coarse = std::move(fine);
  }
}

}  // namespace qgsw::contour
