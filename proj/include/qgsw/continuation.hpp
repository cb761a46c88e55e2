#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgsw/contour.hpp"
#include "qgsw/spectrum.hpp"

namespace qgsw::continuation {

struct BranchPoint {
  int fold = 0;  // m
  double s = 0.0;
  double omega = 0.0;
  contour::FourierBoundary f1{1.0};
  contour::FourierBoundary f2{0.5};
  double residual = 0.0;  // max node |G| on the solve grid
  int node_count = 0;     // P actually used
  int iterations = 0;
};

struct SolverOptions {
  int trunc = 16;  // K, retained modes per interface
  double tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 8;
  double fd_relative_step = 1e-7;
  double condition_limit = 1e14;
  double truncation_threshold = 1e-12;
  int max_trunc = 64;
};

// Smallest multiple of 2m that is >= max(requested, 4 m K).
int solver_node_count(int requested, int m, int trunc);

BranchPoint annulus_point(double lambda, double b, int m, spectrum::Branch sign);

BranchPoint newton_solve(double lambda, double b, int m, spectrum::Branch sign, double s,
                         const std::optional<BranchPoint>& initial_guess,
                         const contour::QuadratureGrid& grid, const SolverOptions& options = {});

struct BranchTrace {
  int fold = 0;
  spectrum::Branch sign = spectrum::Branch::Plus;
  double omega_bifurcation = 0.0;
  std::vector<BranchPoint> points;
  bool complete = false;
  std::string termination;  // "completed" or the failure reason
};

BranchTrace trace_branch(double lambda, double b, int m, spectrum::Branch sign, double s_max,
                         int steps, const contour::QuadratureGrid& grid,
                         const SolverOptions& options = {});

// Intercept of the least-squares line through the `count` smallest-s points.
double extrapolate_omega(const std::vector<BranchPoint>& points, int count = 3);

// Angle in radians between (a_{m-1}, b_{m-1}) of the point and the kernel vector.
double tangent_angle(const BranchPoint& point, double lambda, double b, spectrum::Branch sign);

struct VStateReport {
  double residual = 0.0;
  double symmetry_defect = 0.0;
  double omega = 0.0;
};

// Residual on a grid with twice the nodes of `grid`, evaluated without symmetry folding.
VStateReport verify_vstate(const BranchPoint& point, double lambda, double b,
                           const contour::QuadratureGrid& grid);

}  // namespace qgsw::continuation
