#include "qgsw/special_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "qgsw/errors.hpp"

namespace qgsw::special {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kSeriesEps = 1e-17;

void require_positive(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(who) + ": argument must be a positive finite real, got " +
                      std::to_string(x));
  }
}

// sum_{m>=0} q^m / (m! (n+m)!) * n!, scaled to survive very large x.
Scaled i_series_sum(int n, double q) {
  double t = 1.0;
  double s = 1.0;
  long shift = 0;
  for (int m = 1;; ++m) {
    t *= q / (static_cast<double>(m) * static_cast<double>(n + m));
    s += t;
    if (s > 0x1p900) {
      s = std::ldexp(s, -900);
      t = std::ldexp(t, -900);
      shift += 900;
    }
    if (t <= s * kSeriesEps) break;
  }
  Scaled r{s, shift};
  return r.normalize();
}

Scaled exp_neg(double x) {
  if (x < 700.0) return Scaled::from(std::exp(-x));
  const double q = std::floor(x / kLn2);
  Scaled r = Scaled::from(std::exp(-(x - q * kLn2)));
  r.exponent -= static_cast<long>(q);
  return r;
}

struct K01 {
  Scaled k0;
  Scaled k1;
};

K01 k01(double x) {
  if (x <= 2.0) {
    const LogSplit split = k0_log_split(x);
    const double lg = std::log(0.5 * x);
    const double k0 = split.regular - lg * split.i0;

    // I_1 and sum_k (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
    const double q = 0.25 * x * x;
    double u = 1.0;
    double h_k = 0.0;
    double i1 = 0.0;
    double psi_sum = 0.0;
    for (int k = 0;; ++k) {
      if (k > 0) {
        u *= q / (static_cast<double>(k) * static_cast<double>(k + 1));
        h_k += 1.0 / k;
      }
      const double h_k1 = h_k + 1.0 / (k + 1);
      i1 += u;
      psi_sum += u * (h_k + h_k1 - 2.0 * euler_gamma);
      if (k > 0 && u <= kSeriesEps * i1) break;
    }
    i1 *= 0.5 * x;
    const double k1 = 1.0 / x + lg * i1 - 0.25 * x * psi_sum;
    return {Scaled::from(k0), Scaled::from(k1)};
  }

  // K_nu(x) = e^{-x} int_0^inf exp(-2x sinh^2(t/2)) cosh(nu t) dt, trapezoid rule.
  const double h = std::min(0.2, 0.4 / std::sqrt(x));
  double s0 = 0.5;
  double s1 = 0.5;
  for (int j = 1;; ++j) {
    const double t = j * h;
    const double sh = std::sinh(0.5 * t);
    const double arg = 2.0 * x * sh * sh;
    if (arg > 46.0) break;
    const double e = std::exp(-arg);
    s0 += e;
    s1 += e * std::cosh(t);
  }
  const Scaled decay = exp_neg(x);
  return {Scaled::from(h * s0) * decay, Scaled::from(h * s1) * decay};
}

template <class Sink>
void k_recurrence(int nmax, double x, Sink&& sink) {
  const K01 k = k01(x);
  sink(0, k.k0);
  if (nmax == 0) return;
  sink(1, k.k1);
  long e = k.k1.exponent;
  double a = std::ldexp(k.k0.mantissa, static_cast<int>(k.k0.exponent - e));
  double b = k.k1.mantissa;
  for (int j = 1; j < nmax; ++j) {
    const double c = a + (2.0 * j / x) * b;
    a = b;
    b = c;
    if (b > 0x1p600) {
      a = std::ldexp(a, -600);
      b = std::ldexp(b, -600);
      e += 600;
    }
    Scaled v{b, e};
    sink(j + 1, v.normalize());
  }
}

template <class Sink>
void i_sequence(int nmax, double x, Sink&& sink) {
  const double half = 0.5 * x;
  const double q = half * half;
  Scaled pre{1.0, 0};
  pre.normalize();
  for (int n = 0; n <= nmax; ++n) {
    if (n > 0) {
      pre.mantissa *= half / n;
      pre.normalize();
    }
    if (x == 0.0) {
      sink(n, n == 0 ? Scaled::from(1.0) : Scaled{});
    } else {
      sink(n, pre * i_series_sum(n, q));
    }
  }
}

double checked(Scaled v, const char* who, int n, double x) {
  try {
    return v.to_double();
  } catch (const RangeError&) {
    throw RangeError(std::string(who) + ": result out of double range for n=" +
                     std::to_string(n) + ", x=" + std::to_string(x));
  }
}

}  // namespace

Scaled Scaled::from(double v) {
  Scaled s{v, 0};
  return s.normalize();
}

Scaled& Scaled::normalize() {
  if (mantissa == 0.0) {
    exponent = 0;
    return *this;
  }
  int e = 0;
  mantissa = std::frexp(mantissa, &e);
  exponent += e;
  return *this;
}

double Scaled::to_double() const {
  if (mantissa == 0.0) return 0.0;
  if (exponent > std::numeric_limits<double>::max_exponent) {
    throw RangeError("value overflows double");
  }
  if (exponent < std::numeric_limits<double>::min_exponent) {
    throw RangeError("value underflows the normal double range");
  }
  return std::ldexp(mantissa, static_cast<int>(exponent));
}

double Scaled::log() const { return std::log(mantissa) + static_cast<double>(exponent) * kLn2; }

Scaled operator*(Scaled a, Scaled b) {
  Scaled r{a.mantissa * b.mantissa, a.exponent + b.exponent};
  return r.normalize();
}

Scaled operator/(Scaled a, Scaled b) {
  Scaled r{a.mantissa / b.mantissa, a.exponent - b.exponent};
  return r.normalize();
}

Scaled bessel_i_scaled(int n, double x) {
  n = std::abs(n);
  if (x < 0.0 || !std::isfinite(x)) {
    throw DomainError("bessel_i: argument must be a nonnegative finite real");
  }
  Scaled out;
  i_sequence(n, x, [&](int k, Scaled v) {
    if (k == n) out = v;
  });
  return out;
}

Scaled bessel_k_scaled(int n, double x) {
  n = std::abs(n);
  require_positive(x, "bessel_k");
  Scaled out;
  k_recurrence(n, x, [&](int k, Scaled v) {
    if (k == n) out = v;
  });
  return out;
}

std::vector<Scaled> bessel_i_scaled_sequence(int nmax, double x) {
  if (nmax < 0) throw PreconditionError("bessel_i_scaled_sequence: nmax must be >= 0");
  if (x < 0.0 || !std::isfinite(x)) {
    throw DomainError("bessel_i: argument must be a nonnegative finite real");
  }
  std::vector<Scaled> out;
  out.reserve(static_cast<std::size_t>(nmax) + 1);
  i_sequence(nmax, x, [&](int, Scaled v) { out.push_back(v); });
  return out;
}

std::vector<Scaled> bessel_k_scaled_sequence(int nmax, double x) {
  if (nmax < 0) throw PreconditionError("bessel_k_scaled_sequence: nmax must be >= 0");
  require_positive(x, "bessel_k");
  std::vector<Scaled> out;
  out.reserve(static_cast<std::size_t>(nmax) + 1);
  k_recurrence(nmax, x, [&](int, Scaled v) { out.push_back(v); });
  return out;
}

double bessel_i(int n, double x) { return checked(bessel_i_scaled(n, x), "bessel_i", n, x); }

double bessel_k(int n, double x) { return checked(bessel_k_scaled(n, x), "bessel_k", n, x); }

double bessel_derivative(BesselKind kind, int n, double x, DerivativeForm form) {
  require_positive(x, "bessel_derivative");
  n = std::abs(n);
  const double nu_x = n / x;
  if (kind == BesselKind::I) {
    if (form == DerivativeForm::Lower) return bessel_i(n - 1, x) - nu_x * bessel_i(n, x);
    return bessel_i(n + 1, x) + nu_x * bessel_i(n, x);
  }
  if (form == DerivativeForm::Lower) return -bessel_k(n - 1, x) - nu_x * bessel_k(n, x);
  return -bessel_k(n + 1, x) + nu_x * bessel_k(n, x);
}

double product_ik(int n, double x) { return product_ik(n, x, x); }

double product_ik(int n, double x_i, double x_k) {
  require_positive(x_i, "product_ik");
  require_positive(x_k, "product_ik");
  return checked(bessel_i_scaled(n, x_i) * bessel_k_scaled(n, x_k), "product_ik", n, x_k);
}

std::vector<double> product_ik_sequence(int nmax, double x_i, double x_k) {
  require_positive(x_i, "product_ik");
  require_positive(x_k, "product_ik");
  const auto is = bessel_i_scaled_sequence(nmax, x_i);
  const auto ks = bessel_k_scaled_sequence(nmax, x_k);
  std::vector<double> out(is.size());
  for (std::size_t n = 0; n < is.size(); ++n) {
    out[n] = checked(is[n] * ks[n], "product_ik", static_cast<int>(n), x_k);
  }
  return out;
}

double bessel_j0(double x) {
  if (x < 0.0 || !std::isfinite(x)) throw DomainError("bessel_j0: argument must be >= 0");
  if (x < 1.0) {
    const double q = 0.25 * x * x;
    double t = 1.0;
    double s = 1.0;
    for (int m = 1; m < 30; ++m) {
      t *= -q / (static_cast<double>(m) * m);
      s += t;
      if (std::abs(t) < 1e-18) break;
    }
    return s;
  }
  if (x > 25.0) {
    // Hankel expansion, a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k).
    double p = 0.0;
    double q = 0.0;
    double a = 1.0;
    double prev = INFINITY;
    double xk = 1.0;
    for (int k = 0; k < 60; ++k, xk *= x) {
      const double term = a / xk;
      if (std::abs(term) > prev) break;
      prev = std::abs(term);
      switch (k % 4) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        default: q -= term; break;
      }
      if (std::abs(term) < 1e-17) break;
      const double odd = 2.0 * k + 1.0;
      a *= -odd * odd / (8.0 * (k + 1));
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
  }
  // Miller backward recurrence normalized by J_0 + 2 sum J_{2k} = 1.
  int top = static_cast<int>(1.1 * x) + 50;
  top += top % 2;
  double next = 0.0;
  double cur = 1e-30;
  double norm = 0.0;
  for (int k = top; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;
    next = cur;
    cur = prev;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
    }
  }
  norm += cur;
  return cur / norm;
}

double product_ik_integral(int n, double x) {
  n = std::abs(n);
  if (n < 1) throw PreconditionError("product_ik_integral: requires |n| >= 1");
  require_positive(x, "product_ik_integral");
  // u = 2x sinh(t/2): integrand J_0(u) g(u) with g(u) = e^{-n t(u)} dt/du.
  const double two_x = 2.0 * x;
  auto g = [&](double u) {
    const double s = u / two_x;
    return std::pow(s + std::sqrt(1.0 + s * s), -2.0 * n) * 2.0 / std::sqrt(two_x * two_x + u * u);
  };
  auto f = [&](double u) { return bessel_j0(u) * g(u); };
  using boost::math::quadrature::gauss_kronrod;
  // Partial sums between the approximate zeros (k - 1/4) pi of J_0.
  std::vector<double> partial;
  double sum = 0.0;
  double lo = 0.0;
  double piece = 0.0;
  double last = 0.0;
  for (int k = 1; k < 1000000; ++k) {
    const double hi = (k - 0.25) * std::numbers::pi;
    last = piece;
    piece = gauss_kronrod<double, 31>::integrate(f, lo, hi, 8, 1e-13);
    sum += piece;
    partial.push_back(sum);
    lo = hi;
    if (k > 8 && std::abs(piece) < 1e-10 * std::abs(sum)) break;
  }
  // A slowly decaying alternating tail is summed by repeated averaging of partial sums.
  if (std::abs(piece) < 0.5 * std::abs(last)) return 0.5 * sum;
  std::vector<double> tail(partial.end() - std::min<std::size_t>(partial.size(), 8), partial.end());
  while (tail.size() > 1) {
    for (std::size_t i = 0; i + 1 < tail.size(); ++i) tail[i] = 0.5 * (tail[i] + tail[i + 1]);
    tail.pop_back();
  }
  return 0.5 * tail[0];
}

double digamma_integer(unsigned m) {
  if (m == 0) throw DomainError("digamma_integer: pole at 0");
  double h = 0.0;
  for (unsigned k = 1; k < m; ++k) h += 1.0 / k;
  return h - euler_gamma;
}

std::uint64_t stirling2(unsigned m, unsigned k) {
  if (k > m) return 0;
  if (m == 0) return 1;
  if (k == 0) return 0;
  // row[j] = S(i, j)
  std::vector<std::uint64_t> row(k + 1, 0);
  row[0] = 1;
  for (unsigned i = 1; i <= m; ++i) {
    const unsigned top = std::min(i, k);
    for (unsigned j = top; j >= 1; --j) {
      std::uint64_t scaled = 0;
      std::uint64_t sum = 0;
      if (__builtin_mul_overflow(static_cast<std::uint64_t>(j), row[j], &scaled) ||
          __builtin_add_overflow(row[j - 1], scaled, &sum)) {
        throw std::overflow_error("stirling2: S(" + std::to_string(m) + "," +
                                  std::to_string(k) + ") exceeds 64 bits");
      }
      row[j] = sum;
    }
    row[0] = 0;
  }
  return row[k];
}

double asymptotic_coefficient(unsigned m, double lambda) {
  if (m == 0) return 1.0;
  const double q = 0.25 * lambda * lambda;
  double sum = 0.0;
  double qk = 1.0;
  double fact = 1.0;
  for (unsigned k = 1; k <= m; ++k) {
    qk *= q;
    fact *= k;
    const double term = static_cast<double>(stirling2(m, k)) / fact * qk;
    sum += ((m - k) % 2 == 0) ? term : -term;
  }
  return sum;
}

double product_ik_asymptotic(int n, double lambda, double b, unsigned terms) {
  if (n < 1) throw PreconditionError("product_ik_asymptotic: n must be >= 1");
  if (terms > 8) throw PreconditionError("product_ik_asymptotic: at most 8 correction terms");
  require_positive(lambda, "product_ik_asymptotic");
  if (!(b > 0.0 && b <= 1.0)) throw DomainError("product_ik_asymptotic: b must lie in (0,1]");
  double inner = 0.0;
  double outer = 0.0;
  double np = 1.0;
  for (unsigned m = 0; m <= terms; ++m) {
    inner += asymptotic_coefficient(m, lambda * b) / np;
    const double bm = asymptotic_coefficient(m, lambda) / np;
    outer += (m % 2 == 0) ? bm : -bm;
    np *= n;
  }
  return std::pow(b, n) / (2.0 * n) * inner * outer;
}

double beltrami_k0(double a, double b, double theta, int terms) {
  require_positive(a, "beltrami_k0");
  require_positive(b, "beltrami_k0");
  if (!(b < a)) throw PreconditionError("beltrami_k0: requires 0 < b < a");
  if (terms < 0) throw PreconditionError("beltrami_k0: terms must be >= 0");
  const auto prod = product_ik_sequence(terms, b, a);
  double sum = 0.0;
  for (int m = terms; m >= 1; --m) sum += 2.0 * prod[m] * std::cos(m * theta);
  return sum + prod[0];
}

LogSplit k0_log_split(double x) {
  require_positive(x, "k0_log_split");
  const double q = 0.25 * x * x;
  double t = 1.0;
  double i0 = 1.0;
  double h = 0.0;
  double weighted = 0.0;  // sum t_m H_m
  for (int m = 1;; ++m) {
    t *= q / (static_cast<double>(m) * m);
    h += 1.0 / m;
    i0 += t;
    weighted += t * h;
    if (t <= kSeriesEps * i0) break;
  }
  return {i0, weighted - euler_gamma * i0};
}

double k0_regularized(double x) { return k0_log_split(x).regular; }

}  // namespace qgsw::special
