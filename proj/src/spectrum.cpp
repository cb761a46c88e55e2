#include "qgsw/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgsw/errors.hpp"
#include "qgsw/special_functions.hpp"

namespace qgsw::spectrum {

namespace {

void check_order(int n, const char* who) {
  if (n < 1) throw PreconditionError(std::string(who) + ": order must be >= 1");
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

// Raw ingredients of M_n: I_1K_1 and I_nK_n at lambda and lambda b, Lambda_1, Lambda_n.
struct Ingredients {
  double outer_1, outer_n;
  double inner_1, inner_n;
  double coupling_1, coupling_n;
};

Ingredients ingredients(int n, double lambda, double b) {
  const double lb = lambda * b;
  return {special::product_ik(1, lambda), special::product_ik(n, lambda),
          special::product_ik(1, lb),     special::product_ik(n, lb),
          special::product_ik(1, lb, lambda), special::product_ik(n, lb, lambda)};
}

QuadraticCoefficients quadratic_from(const Ingredients& g, double b) {
  const double om_outer = g.outer_1 - g.outer_n;
  const double om_inner = g.inner_1 - g.inner_n;
  const double l1 = g.coupling_1;
  const double ln = g.coupling_n;
  QuadraticCoefficients q;
  q.B = (1.0 - b * b) * l1 + b * (om_outer - om_inner);
  q.C = b * ((l1 - om_outer / b) * (b * om_inner - l1) + ln * ln);
  return q;
}

double discriminant_from(const Ingredients& g, double b) {
  const double om_outer = g.outer_1 - g.outer_n;
  const double om_inner = g.inner_1 - g.inner_n;
  const double e = b * (om_outer + om_inner) - (1.0 + b * b) * g.coupling_1;
  return e * e - 4.0 * b * b * g.coupling_n * g.coupling_n;
}

std::optional<EigenPair> eigen_from(int n, const Ingredients& g, double b) {
  const double delta = discriminant_from(g, b);
  if (delta < 0.0) return std::nullopt;
  const QuadraticCoefficients q = quadratic_from(g, b);
  const double root = std::sqrt(delta);
  EigenPair e;
  e.n = n;
  e.discriminant = delta;
  e.B = q.B;
  e.C = q.C;
  e.omega_minus = (q.B - root) / (2.0 * b);
  e.omega_plus = (q.B + root) / (2.0 * b);
  e.degenerate = (delta == 0.0);
  return e;
}

}  // namespace

const char* to_string(Branch sign) { return sign == Branch::Plus ? "plus" : "minus"; }

double SpectralMatrix::max_abs() const {
  return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
}

std::array<double, 2> SpectralMatrix::apply(const std::array<double, 2>& v) const {
  return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]};
}

double lambda_coupling(int n, double lambda, double b) {
  check_order(n, "lambda_coupling");
  check_lambda(lambda, "lambda_coupling");
  if (!(b > 0.0 && b <= 1.0)) throw DomainError("lambda_coupling: b must lie in (0,1]");
  return special::product_ik(n, lambda * b, lambda);
}

double omega_rankine(int n, double x) {
  check_order(n, "omega_rankine");
  check_lambda(x, "omega_rankine");
  return special::product_ik(1, x) - special::product_ik(n, x);
}

SpectralMatrix spectral_matrix(int n, double lambda, double b, double omega) {
  check_order(n, "spectral_matrix");
  check_lambda(lambda, "spectral_matrix");
  check_b(b, "spectral_matrix");
  const double l1 = lambda_coupling(1, lambda, b);
  const double ln = lambda_coupling(n, lambda, b);
  SpectralMatrix m;
  m.n = n;
  m.lambda = lambda;
  m.b = b;
  m.omega = omega;
  m.m11 = omega_rankine(n, lambda) - omega - b * l1;
  m.m12 = b * ln;
  m.m21 = -ln;
  m.m22 = l1 - b * (omega_rankine(n, lambda * b) + omega);
  return m;
}

QuadraticCoefficients quadratic_coefficients(int n, double lambda, double b) {
  check_order(n, "quadratic_coefficients");
  check_lambda(lambda, "quadratic_coefficients");
  check_b(b, "quadratic_coefficients");
  return quadratic_from(ingredients(n, lambda, b), b);
}

double discriminant(int n, double lambda, double b) {
  check_order(n, "discriminant");
  check_lambda(lambda, "discriminant");
  check_b(b, "discriminant");
  return discriminant_from(ingredients(n, lambda, b), b);
}

double delta_infinity(double lambda, double b) {
  check_lambda(lambda, "delta_infinity");
  check_b(b, "delta_infinity");
  return b * (special::product_ik(1, lambda) + special::product_ik(1, lambda * b)) -
         (1.0 + b * b) * special::product_ik(1, lambda * b, lambda);
}

double discriminant_limit(double lambda, double b) {
  const double d = delta_infinity(lambda, b);
  return d * d;
}

std::optional<EigenPair> eigenvalues(int n, double lambda, double b) {
  check_order(n, "eigenvalues");
  check_lambda(lambda, "eigenvalues");
  check_b(b, "eigenvalues");
  return eigen_from(n, ingredients(n, lambda, b), b);
}

OmegaLimits omega_limits(double lambda, double b) {
  check_lambda(lambda, "omega_limits");
  check_b(b, "omega_limits");
  const double l1 = special::product_ik(1, lambda * b, lambda);
  return {l1 / b - special::product_ik(1, lambda * b),
          special::product_ik(1, lambda) - b * l1};
}

SpectrumTable::SpectrumTable(double lambda, double b, int nmax)
    : lambda_(lambda), b_(b), nmax_(nmax) {
  check_lambda(lambda, "SpectrumTable");
  check_b(b, "SpectrumTable");
  if (nmax < 1) throw PreconditionError("SpectrumTable: nmax must be >= 1");
  ik_outer_ = special::product_ik_sequence(nmax, lambda, lambda);
  ik_inner_ = special::product_ik_sequence(nmax, lambda * b, lambda * b);
  coupling_ = special::product_ik_sequence(nmax, lambda * b, lambda);
}

double SpectrumTable::discriminant(int n) const {
  const Ingredients g{ik_outer_[1], ik_outer_[n], ik_inner_[1],
                      ik_inner_[n], coupling_[1], coupling_[n]};
  return discriminant_from(g, b_);
}

std::optional<EigenPair> SpectrumTable::eigenvalues(int n) const {
  const Ingredients g{ik_outer_[1], ik_outer_[n], ik_inner_[1],
                      ik_inner_[n], coupling_[1], coupling_[n]};
  return eigen_from(n, g, b_);
}

ThresholdRecord find_threshold(double lambda, double b, int window, int cap) {
  check_lambda(lambda, "find_threshold");
  check_b(b, "find_threshold");
  if (window < 10) throw PreconditionError("find_threshold: window must be >= 10");
  if (cap < 1) throw PreconditionError("find_threshold: cap must be >= 1");

  const OmegaLimits lim = omega_limits(lambda, b);
  const int hard_limit = cap + window + 1;
  int size = 256;
  for (;;) {
    const int nmax = std::min(size, hard_limit);
    const SpectrumTable table(lambda, b, nmax);

    // Tail certificate at n = nmax: b[Omega_n(lambda) + Omega_n(lambda b)] - (1+b^2) Lambda_1
    // increases in n and Lambda_n decreases, so a positive gap and a positive discriminant
    // at nmax persist for every larger order.
    const double gap = b * (table.omega_rankine_outer(nmax) + table.omega_rankine_inner(nmax)) -
                       (1.0 + b * b) * table.lambda_coupling(1);
    const bool tail_ok = gap > 0.0 && table.discriminant(nmax) > 0.0;

    int n0 = 1;
    for (int k = nmax; k >= 1; --k) {
      if (!(table.discriminant(k) > 0.0)) {
        n0 = k + 1;
        break;
      }
    }

    if (tail_ok && n0 <= cap) {
      // Search for a run of `window + 1` consecutive strictly monotone steps.
      int run_start = n0;
      std::optional<EigenPair> prev = table.eigenvalues(n0);
      for (int k = n0; k + 1 <= nmax; ++k) {
        const auto next = table.eigenvalues(k + 1);
        const bool good = prev && next && next->omega_plus > prev->omega_plus &&
                          next->omega_minus < prev->omega_minus &&
                          next->omega_plus < lim.plus && next->omega_minus > lim.minus &&
                          prev->omega_minus < prev->omega_plus;
        if (!good) run_start = k + 1;
        if (run_start > cap) break;
        if (k - run_start >= window) return {n0, run_start};
        prev = next;
      }
    }
    if (nmax >= hard_limit) {
      throw SearchExhausted("find_threshold: no threshold below cap " + std::to_string(cap) +
                            " at lambda=" + std::to_string(lambda) +
                            ", b=" + std::to_string(b));
    }
    size *= 2;
  }
}

double euler_admissibility(int n, double b) {
  check_order(n, "euler_admissibility");
  check_b(b, "euler_admissibility");
  return 1.0 + std::pow(b, n) - n * (1.0 - b * b) / 2.0;
}

std::optional<EulerPair> euler_eigenvalues(int n, double b) {
  if (!(euler_admissibility(n, b) < 0.0)) return std::nullopt;
  const double h = n * (1.0 - b * b) / 2.0 - 1.0;
  const double radicand = h * h - std::pow(b, 2 * n);
  if (!(radicand > 0.0)) return std::nullopt;
  const double root = std::sqrt(radicand) / (2.0 * n);
  const double mid = (1.0 - b * b) / 4.0;
  return EulerPair{mid - root, mid + root};
}

double simply_connected_limit(int n, double lambda) { return omega_rankine(n, lambda); }

double simply_connected_lower_limit(int n, double lambda) {
  check_order(n, "simply_connected_lower_limit");
  check_lambda(lambda, "simply_connected_lower_limit");
  return (lambda * n * special::bessel_k(1, lambda) - n + 1.0) / (2.0 * n);
}

namespace {

EigenPair require_simple(int m, double lambda, double b, const char* who) {
  check_order(m, who);
  const double delta = discriminant(m, lambda, b);
  if (!(delta > 0.0)) {
    throw PreconditionError(std::string(who) + ": discriminant Delta_" + std::to_string(m) +
                            " = " + std::to_string(delta) + " is not positive");
  }
  return *eigenvalues(m, lambda, b);
}

}  // namespace

std::array<double, 2> kernel_vector(int m, double lambda, double b, Branch sign) {
  const EigenPair e = require_simple(m, lambda, b, "kernel_vector");
  const double omega = e.omega(sign);
  return {b * (omega_rankine(m, lambda * b) + omega) - lambda_coupling(1, lambda, b),
          -lambda_coupling(m, lambda, b)};
}

double transversality_obstruction(int m, double lambda, double b, double omega) {
  check_order(m, "transversality_obstruction");
  check_b(b, "transversality_obstruction");
  const double x = lambda_coupling(1, lambda, b) - b * (omega_rankine(m, lambda * b) + omega);
  const double y = b * lambda_coupling(m, lambda, b);
  return x * x - y * y;
}

double transversality_scale(int m, double lambda, double b, double omega) {
  check_order(m, "transversality_scale");
  check_b(b, "transversality_scale");
  const double x = lambda_coupling(1, lambda, b) - b * (omega_rankine(m, lambda * b) + omega);
  const double y = b * lambda_coupling(m, lambda, b);
  return x * x + y * y;
}

bool transversality_check(int m, double lambda, double b, Branch sign) {
  const EigenPair e = require_simple(m, lambda, b, "transversality_check");
  const double omega = e.omega(sign);
  return std::abs(transversality_obstruction(m, lambda, b, omega)) >
         1e-10 * transversality_scale(m, lambda, b, omega);
}

std::vector<double> harmonic_determinants(int m, double lambda, double b, Branch sign,
                                          int kmax) {
  const EigenPair e = require_simple(m, lambda, b, "harmonic_determinants");
  std::vector<double> dets;
  for (int k = 2; k <= kmax; ++k) {
    dets.push_back(spectral_matrix(k * m, lambda, b, e.omega(sign)).det());
  }
  return dets;
}

}  // namespace qgsw::spectrum
