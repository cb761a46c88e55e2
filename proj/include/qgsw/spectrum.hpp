#pragma once

#include <array>
#include <optional>
#include <vector>

namespace qgsw::spectrum {

enum class Branch { Minus, Plus };

const char* to_string(Branch sign);

struct SpectralMatrix {
  int n = 0;
  double lambda = 0.0;
  double b = 0.0;
  double omega = 0.0;
  double m11 = 0.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 0.0;

  double det() const { return m11 * m22 - m12 * m21; }
  double max_abs() const;
  std::array<double, 2> apply(const std::array<double, 2>& v) const;
};

struct QuadraticCoefficients {
  double B = 0.0;
  double C = 0.0;
};

struct EigenPair {
  int n = 0;
  double omega_minus = 0.0;
  double omega_plus = 0.0;
  double discriminant = 0.0;
  double B = 0.0;
  double C = 0.0;
  bool degenerate = false;

  double omega(Branch sign) const { return sign == Branch::Plus ? omega_plus : omega_minus; }
};

struct OmegaLimits {
  double minus = 0.0;
  double plus = 0.0;
};

struct ThresholdRecord {
  int n0 = 0;  // smallest n with Delta_k > 0 for every k >= n inside the scanned range
  int n = 0;   // smallest n >= n0 where both branches are strictly monotone over the window
};

struct EulerPair {
  double minus = 0.0;
  double plus = 0.0;
};

// I_n(lambda b) K_n(lambda), b in (0,1].
double lambda_coupling(int n, double lambda, double b);
// I_1 K_1(x) - I_n K_n(x).
double omega_rankine(int n, double x);

SpectralMatrix spectral_matrix(int n, double lambda, double b, double omega);
QuadraticCoefficients quadratic_coefficients(int n, double lambda, double b);
double discriminant(int n, double lambda, double b);
// delta_inf = b [I_1K_1(lambda) + I_1K_1(lambda b)] - (1 + b^2) Lambda_1.
double delta_infinity(double lambda, double b);
double discriminant_limit(double lambda, double b);

std::optional<EigenPair> eigenvalues(int n, double lambda, double b);
OmegaLimits omega_limits(double lambda, double b);

// Table of eigen data for n = 1..nmax, built from one pass over Bessel sequences.
class SpectrumTable {
 public:
  SpectrumTable(double lambda, double b, int nmax);

  int nmax() const { return nmax_; }
  double lambda_coupling(int n) const { return coupling_[n]; }
  double omega_rankine_outer(int n) const { return ik_outer_[1] - ik_outer_[n]; }
  double omega_rankine_inner(int n) const { return ik_inner_[1] - ik_inner_[n]; }
  double discriminant(int n) const;
  std::optional<EigenPair> eigenvalues(int n) const;

 private:
  double lambda_;
  double b_;
  int nmax_;
  std::vector<double> ik_outer_;  // I_nK_n(lambda)
  std::vector<double> ik_inner_;  // I_nK_n(lambda b)
  std::vector<double> coupling_;  // I_n(lambda b)K_n(lambda)
};

ThresholdRecord find_threshold(double lambda, double b, int window = 50, int cap = 100000);

double euler_admissibility(int n, double b);
std::optional<EulerPair> euler_eigenvalues(int n, double b);

// b -> 0 limit of the upper eigenvalue.
double simply_connected_limit(int n, double lambda);
// b -> 0 limit of the lower eigenvalue, (lambda n K_1(lambda) - n + 1) / (2n).
double simply_connected_lower_limit(int n, double lambda);

std::array<double, 2> kernel_vector(int m, double lambda, double b, Branch sign);

// (Lambda_1 - b[Omega_m(lambda b) + Omega])^2 - b^2 Lambda_m^2 at an arbitrary Omega.
double transversality_obstruction(int m, double lambda, double b, double omega);
// Scale against which the obstruction is compared.
double transversality_scale(int m, double lambda, double b, double omega);
bool transversality_check(int m, double lambda, double b, Branch sign);

// det M_{km}(Omega_m^sign) for k = 2..kmax; all must be nonzero for a simple kernel.
std::vector<double> harmonic_determinants(int m, double lambda, double b, Branch sign, int kmax);

}  // namespace qgsw::spectrum
