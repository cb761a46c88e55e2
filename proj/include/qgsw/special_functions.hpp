#pragma once

#include <cstdint>
#include <vector>

namespace qgsw::special {

inline constexpr double euler_gamma = 0.57721566490153286060;

enum class BesselKind { I, K };

// Which neighbour order the derivative recurrence uses: Z_{n-1} or Z_{n+1}.
enum class DerivativeForm { Lower, Upper };

// mantissa * 2^exponent with mantissa in [0.5, 1) (or exactly 0).
// Carries I_n and K_n far outside the double range so that products stay exact.
struct Scaled {
  double mantissa = 0.0;
  long exponent = 0;

  static Scaled from(double v);
  Scaled& normalize();
  // Throws RangeError when the value overflows or falls below the normal range.
  double to_double() const;
  double log() const;

  friend Scaled operator*(Scaled a, Scaled b);
  friend Scaled operator/(Scaled a, Scaled b);
};

Scaled bessel_i_scaled(int n, double x);
Scaled bessel_k_scaled(int n, double x);

// Orders 0..nmax in one pass. Entry n is bit-identical to the scalar call.
std::vector<Scaled> bessel_i_scaled_sequence(int nmax, double x);
std::vector<Scaled> bessel_k_scaled_sequence(int nmax, double x);

double bessel_i(int n, double x);
double bessel_k(int n, double x);
double bessel_derivative(BesselKind kind, int n, double x,
                         DerivativeForm form = DerivativeForm::Lower);

// I_n(x) K_n(x).
double product_ik(int n, double x);
// I_n(x_i) K_n(x_k).
double product_ik(int n, double x_i, double x_k);
// I_n(x_i) K_n(x_k) for n = 0..nmax.
std::vector<double> product_ik_sequence(int nmax, double x_i, double x_k);

double bessel_j0(double x);

// (1/2) int_0^inf J_0(2x sinh(t/2)) e^{-|n| t} dt, n != 0; equals I_n(x) K_n(x).
double product_ik_integral(int n, double x);

// psi(m) for integer m >= 1, as H_{m-1} - gamma.
double digamma_integer(unsigned m);

// Stirling numbers of the second kind. Throws std::overflow_error past uint64.
std::uint64_t stirling2(unsigned m, unsigned k);

// b_m(lambda) = sum_{k=1}^{m} (-1)^{m-k} S(m,k)/k! (lambda^2/4)^k, b_0 = 1.
double asymptotic_coefficient(unsigned m, double lambda);

// Large-n expansion of I_n(lambda b) K_n(lambda), truncated after `terms`
// correction terms (terms <= 8).
double product_ik_asymptotic(int n, double lambda, double b, unsigned terms);

// sum_{m=-M}^{M} I_m(b) K_m(a) cos(m theta), 0 < b < a.
double beltrami_k0(double a, double b, double theta, int terms);

// K_0(x) + log(x/2) I_0(x).
double k0_regularized(double x);

struct LogSplit {
  double i0;       // I_0(x)
  double regular;  // k0_regularized(x)
};

// Both pieces of K_0(x) = -log(x/2) I_0(x) + k0_regularized(x) from one series.
// Intended for moderate x (the series has positive terms only).
LogSplit k0_log_split(double x);

}  // namespace qgsw::special
