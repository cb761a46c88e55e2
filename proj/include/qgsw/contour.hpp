#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qgsw/spectrum.hpp"

namespace qgsw::contour {

using cplx = std::complex<double>;

// Interface w -> scale*w + sum_n a_n conj(w)^n on the unit circle.
class FourierBoundary {
 public:
  explicit FourierBoundary(double scale, std::vector<double> coefficients = {});

  static FourierBoundary single_mode(double scale, int index, double amplitude);

  double scale() const { return scale_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double coefficient(int n) const;
  void set_coefficient(int n, double value);

  // sum |a_n| (n + 1)
  double ball_norm() const;
  bool within_ball() const { return ball_norm() < 0.5 * scale_; }
  // Throws BallGuardViolation.
  void validate() const;

  // Nonzero coefficients only at indices m k - 1.
  bool has_fold_symmetry(int m) const;
  // Sum of squares of coefficients off the lattice m k - 1.
  double off_lattice_energy(int m) const;

  friend bool operator==(const FourierBoundary&, const FourierBoundary&) = default;

 private:
  double scale_;
  std::vector<double> coefficients_;
};

class QuadratureGrid {
 public:
  explicit QuadratureGrid(int node_count, double phase = 0.0);

  int size() const { return static_cast<int>(nodes_.size()); }
  double phase() const { return phase_; }
  double angle(int k) const;
  const std::vector<cplx>& nodes() const { return nodes_; }
  // (1/2pi) int log|1 - e^{i theta}| cos(n theta) d theta for n = 1..P/2 (entry n-1).
  const std::vector<double>& log_moments() const { return log_moments_; }
  // Product weights: (1/2pi) int g(theta) (-log|e^{i theta_j} - e^{i theta}|) d theta
  //   ~ sum_k log_weight(j - k) g(theta_k).
  double log_weight(int offset) const;
  // |w_j - w_k| for offset j - k.
  double chord(int offset) const;

 private:
  double phase_;
  std::vector<cplx> nodes_;
  std::vector<double> log_moments_;
  std::vector<double> log_weights_;
  std::vector<double> chords_;
};

struct ConformalSamples {
  std::vector<cplx> value;
  std::vector<cplx> derivative;
};

struct ContourOptions {
  // Evaluate targets only on the first P/fold nodes and replicate. Requires fold-symmetric
  // boundaries and P divisible by fold.
  int fold = 1;
  // Diagnostic fault: integrate the inner interface with reversed orientation.
  bool reverse_inner_orientation = false;
};

ConformalSamples conformal_eval(const FourierBoundary& boundary, const QuadratureGrid& grid);

// S(lambda, source, target)(w_k) = (1/2pi) int Phi_s'(tau) K_0(lambda |Phi_t(w_k) - Phi_s(tau)|)
//                                   tau d theta.
std::vector<cplx> s_integral(double lambda, const FourierBoundary& source,
                             const FourierBoundary& target, const QuadratureGrid& grid);

struct GValues {
  std::vector<double> g1;
  std::vector<double> g2;
  double max_abs() const;
};

GValues g_functional(double lambda, double b, double omega, const FourierBoundary& f1,
                     const FourierBoundary& f2, const QuadratureGrid& grid,
                     const ContourOptions& options = {});

// (2/P) sum v_k sin(n theta_k), (2/P) sum v_k cos(n theta_k), (1/P) sum v_k.
double sine_coefficient(std::span<const double> values, const QuadratureGrid& grid, int n);
double cosine_coefficient(std::span<const double> values, const QuadratureGrid& grid, int n);
double mean_value(std::span<const double> values);

struct ModeEnergy {
  double mean = 0.0;         // squared mean
  double cosine = 0.0;       // sum of squared cosine coefficients
  double sine = 0.0;         // sum of squared sine coefficients
  double off_lattice = 0.0;  // sine + cosine energy at modes not divisible by the fold
};

ModeEnergy mode_energy(std::span<const double> values, const QuadratureGrid& grid, int fold = 1);

struct LinearizationReport {
  spectrum::SpectralMatrix analytic;
  double recovered[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double max_deviation = 0.0;  // max_ij |recovered - analytic|
  double leakage = 0.0;        // largest response outside mode n (scaled like the entries)
};

LinearizationReport linearization_check(int n, double lambda, double b, double omega,
                                        double epsilon, const QuadratureGrid& grid,
                                        const ContourOptions& options = {});

// (1/2pi)[int_{dD_1} - int_{dD_2}] K_0(lambda |z - xi|) d xi.
cplx velocity_at(cplx z, const FourierBoundary& f1, const FourierBoundary& f2, double lambda,
                 double b, const QuadratureGrid& grid);

struct RefinedG {
  GValues values;
  int node_count = 0;
  double change = 0.0;  // max node change at the final doubling
};

// Doubles P from `start` until common nodes change by < tol (cap 4096).
RefinedG g_functional_refined(double lambda, double b, double omega, const FourierBoundary& f1,
                              const FourierBoundary& f2, int start = 256, double tol = 1e-10,
                              int cap = 4096);

}  // namespace qgsw::contour
