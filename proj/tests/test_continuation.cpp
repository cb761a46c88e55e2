#include <doctest.h>

#include <cmath>

#include "qgsw/continuation.hpp"
#include "qgsw/errors.hpp"

using namespace qgsw::continuation;
using qgsw::contour::QuadratureGrid;
using qgsw::spectrum::Branch;

namespace {
const QuadratureGrid kGrid(256);

void check_support(const BranchPoint& p, int m) {
  CHECK(p.f1.has_fold_symmetry(m));
  CHECK(p.f2.has_fold_symmetry(m));
  CHECK(p.f1.off_lattice_energy(m) == 0.0);
  CHECK(p.f2.off_lattice_energy(m) == 0.0);
}
}  // namespace

TEST_CASE("solver node count") {
  CHECK(solver_node_count(256, 5, 16) == 320);
  CHECK(solver_node_count(256, 3, 4) == 258);
  CHECK(solver_node_count(512, 4, 16) == 512);
}

TEST_CASE("zero amplitude gives the annulus") {
  for (Branch s : {Branch::Minus, Branch::Plus}) {
    const BranchPoint p = newton_solve(1.0, 0.5, 5, s, 0.0, std::nullopt, kGrid);
    CHECK(p.omega == qgsw::spectrum::eigenvalues(5, 1.0, 0.5)->omega(s));
    CHECK(p.residual <= 1e-11);
    CHECK(p.f1.ball_norm() == 0.0);
    CHECK(p.f2.ball_norm() == 0.0);
  }
  const auto a = annulus_point(1.0, 0.5, 5, Branch::Plus);
  CHECK(a.f1.scale() == 1.0);
  CHECK(a.f2.scale() == 0.5);
}

TEST_CASE("small amplitude solutions follow the kernel") {
  const int m = 5;
  for (Branch s : {Branch::Minus, Branch::Plus}) {
    const BranchPoint p = newton_solve(1.0, 0.5, m, s, 1e-4, std::nullopt, kGrid);
    const double om = qgsw::spectrum::eigenvalues(m, 1.0, 0.5)->omega(s);
    CHECK(std::abs(p.omega - om) < 1e-2);
    CHECK(p.residual < 1e-10);
    CHECK(p.f1.coefficient(m - 1) == 1e-4);
    check_support(p, m);
    const auto v = qgsw::spectrum::kernel_vector(m, 1.0, 0.5, s);
    const double ratio = p.f2.coefficient(m - 1) / p.f1.coefficient(m - 1);
    CHECK(std::abs(ratio / (v[1] / v[0]) - 1) < 0.05);
  }
}

TEST_CASE("solver preconditions") {
  CHECK_THROWS_AS(newton_solve(1.0, 0.5, 2, Branch::Plus, 1e-4, std::nullopt, kGrid),
                  qgsw::PreconditionError);
  CHECK_THROWS_AS(newton_solve(1.0, 0.5, 1, Branch::Plus, 1e-4, std::nullopt, kGrid),
                  qgsw::PreconditionError);
  CHECK_THROWS_AS(newton_solve(1.0, 0.5, 5, Branch::Plus, 0.2, std::nullopt, kGrid),
                  qgsw::PreconditionError);
}

TEST_CASE("plus branch at (1, 0.5, m = 5)") {
  const int m = 5;
  const BranchTrace t = trace_branch(1.0, 0.5, m, Branch::Plus, 5e-3, 8, kGrid);
  REQUIRE(t.complete);
  CHECK(t.termination == "completed");
  REQUIRE(t.points.size() == 8);
  double prev = 0;
  for (const auto& p : t.points) {
    CHECK(p.s > prev);
    prev = p.s;
    CHECK(p.residual <= 1e-10);
    CHECK(p.f1.coefficient(m - 1) == p.s);
    check_support(p, m);
  }
  CHECK(std::abs(extrapolate_omega(t.points) - t.omega_bifurcation) < 1e-3);
  const double angle = tangent_angle(t.points.front(), 1.0, 0.5, Branch::Plus);
  CHECK(angle < 0.05 * std::numbers::pi / 2);

  const VStateReport r = verify_vstate(t.points.back(), 1.0, 0.5, kGrid);
  CHECK(r.residual <= 1e-9);
  CHECK(r.symmetry_defect == 0.0);
  CHECK(r.omega == t.points.back().omega);
  CHECK(std::abs(r.residual - t.points.back().residual) < 1e-9);

  BranchPoint bad = t.points.back();
  bad.f2.set_coefficient(2 * m - 1, bad.f2.coefficient(2 * m - 1) + 1e-3);
  CHECK(verify_vstate(bad, 1.0, 0.5, kGrid).residual > 1e-6);
}

TEST_CASE("annulus report is empty") {
  const VStateReport r = verify_vstate(annulus_point(1.0, 0.5, 5, Branch::Minus), 1.0, 0.5, kGrid);
  CHECK(r.residual <= 1e-11);
  CHECK(r.symmetry_defect == 0.0);
}

TEST_CASE("branch orderings at small amplitude") {
  const BranchTrace lo = trace_branch(1.0, 0.5, 5, Branch::Minus, 3.2e-4, 8, kGrid);
  const BranchTrace hi = trace_branch(1.0, 0.5, 5, Branch::Plus, 3.2e-4, 8, kGrid);
  REQUIRE(lo.complete);
  REQUIRE(hi.complete);
  for (int j = 0; j < 8; ++j) CHECK(lo.points[j].omega < hi.points[j].omega);
  CHECK(std::abs(extrapolate_omega(lo.points) - lo.omega_bifurcation) < 1e-3);
  CHECK(tangent_angle(lo.points.front(), 1.0, 0.5, Branch::Minus) < 0.05 * std::numbers::pi / 2);
}

TEST_CASE("minus branch reports the amplitude limit instead of failing silently") {
  const BranchTrace t = trace_branch(1.0, 0.5, 5, Branch::Minus, 5e-3, 8, kGrid);
  CHECK_FALSE(t.complete);
  CHECK(t.points.size() < 8);
  CHECK(t.termination.find("scale/2") != std::string::npos);
}
