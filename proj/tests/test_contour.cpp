#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qgsw/contour.hpp"
#include "qgsw/errors.hpp"

using namespace qgsw::contour;
using qgsw::BallGuardViolation;
using qgsw::NearBoundary;
using qgsw::PreconditionError;

namespace {

FourierBoundary outer_mode(int m, double eps) { return FourierBoundary::single_mode(1.0, m - 1, eps); }

FourierBoundary smooth_outer() { return FourierBoundary(1.0, {0.0, 0.0, 0.01, 0.0, -0.004, 0.002}); }
FourierBoundary smooth_inner() { return FourierBoundary(0.5, {0.0, 0.003, 0.0, 0.001}); }

}  // namespace

TEST_CASE("quadrature grid moments and weights") {
  const QuadratureGrid g(64);
  CHECK(g.size() == 64);
  for (int n = 1; n <= 32; ++n) CHECK(g.log_moments()[n - 1] == -1.0 / (2 * n));
  for (int n = 1; n < 32; ++n) {
    for (int j : {0, 5, 40}) {
      double s = 0;
      for (int k = 0; k < 64; ++k) s += g.log_weight(j - k) * std::cos(n * g.angle(k));
      CHECK(std::abs(s - std::cos(n * g.angle(j)) / (2.0 * n)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(QuadratureGrid(7), PreconditionError);
  CHECK_THROWS_AS(QuadratureGrid(2), PreconditionError);
}

TEST_CASE("fourier boundary guard") {
  FourierBoundary f(1.0);
  CHECK(f.within_ball());
  f.set_coefficient(4, 0.11);
  CHECK_FALSE(f.within_ball());
  CHECK_THROWS_AS(f.validate(), BallGuardViolation);
  CHECK(FourierBoundary::single_mode(0.5, 4, 0.01).has_fold_symmetry(5));
  CHECK_FALSE(FourierBoundary(1.0, {0.0, 0.0, 0.01}).has_fold_symmetry(5));
  CHECK(FourierBoundary(1.0, {0.0, 0.0, 0.01}).off_lattice_energy(5) == doctest::Approx(1e-4));
}

TEST_CASE("conformal evaluation") {
  const QuadratureGrid g(64);
  const auto flat = conformal_eval(FourierBoundary(0.5), g);
  for (int k = 0; k < 64; ++k) {
    CHECK(flat.value[k] == 0.5 * g.nodes()[k]);
    CHECK(flat.derivative[k] == cplx(0.5));
  }

  const int m = 4;
  const auto f = outer_mode(m, 0.05);
  const auto s = conformal_eval(f, g);
  const cplx rot = std::polar(1.0, 2 * std::numbers::pi / m);
  for (int k = 0; k < 64; ++k) {
    CHECK(std::abs(s.value[(k + 64 / m) % 64] - rot * s.value[k]) < 1e-15);
  }

  // d/dtheta Phi(e^{i theta}) = i w Phi'(w): compare with direct-sum trigonometric differentiation.
  const auto p = conformal_eval(smooth_outer(), g);
  for (int j = 0; j < 64; j += 7) {
    cplx d = 0;
    for (int n = -31; n <= 31; ++n) {
      cplx c = 0;
      for (int k = 0; k < 64; ++k) c += p.value[k] * std::polar(1.0, -n * g.angle(k));
      d += cplx(0, n) * c / 64.0 * std::polar(1.0, n * g.angle(j));
    }
    CHECK(std::abs(d - cplx(0, 1) * g.nodes()[j] * p.derivative[j]) < 1e-12);
  }
}

TEST_CASE("s_integral between flat interfaces") {
  const double lambda = 1.0, b = 0.5;
  const QuadratureGrid g(128);
  const auto s = s_integral(lambda, FourierBoundary(b), FourierBoundary(1.0), g);
  const double expected = b * oracle::i(1, lambda * b) * oracle::k(1, lambda);
  for (int k = 0; k < g.size(); ++k) {
    const cplx v = std::conj(g.nodes()[k]) * s[k];
    CHECK(std::abs(v - expected) < 1e-13);
  }
}

TEST_CASE("s_integral has real Fourier coefficients") {
  const QuadratureGrid g(128);
  for (bool self : {true, false}) {
    const auto src = smooth_inner();
    const auto s = self ? s_integral(1.3, smooth_outer(), smooth_outer(), g)
                        : s_integral(1.3, src, smooth_outer(), g);
    for (int k = 1; k < 64; ++k) CHECK(std::abs(std::conj(s[k]) - s[128 - k]) < 1e-13);
  }
}

TEST_CASE("s_integral converges under refinement") {
  const QuadratureGrid coarse(128), fine(256);
  for (bool self : {true, false}) {
    const auto a = self ? s_integral(1.0, smooth_outer(), smooth_outer(), coarse)
                        : s_integral(1.0, smooth_inner(), smooth_outer(), coarse);
    const auto c = self ? s_integral(1.0, smooth_outer(), smooth_outer(), fine)
                        : s_integral(1.0, smooth_inner(), smooth_outer(), fine);
    double worst = 0;
    for (int k = 0; k < 128; ++k) worst = std::max(worst, std::abs(a[k] - c[2 * k]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("s_integral on a rotated grid") {
  const QuadratureGrid base(128), shifted(128, 0.3);
  const auto a = s_integral(0.7, FourierBoundary(1.0), FourierBoundary(1.0), base);
  const auto c = s_integral(0.7, FourierBoundary(1.0), FourierBoundary(1.0), shifted);
  for (int k = 0; k < 128; ++k) CHECK(std::abs(c[k] - std::polar(1.0, 0.3) * a[k]) < 1e-11);

  // Half-step phase reproduces the odd nodes of the doubled grid.
  const QuadratureGrid half(128, std::numbers::pi / 128), fine(256);
  const auto h = s_integral(1.0, smooth_outer(), smooth_outer(), half);
  const auto f = s_integral(1.0, smooth_outer(), smooth_outer(), fine);
  for (int k = 0; k < 128; ++k) CHECK(std::abs(h[k] - f[2 * k + 1]) < 1e-11);
}

TEST_CASE("collision is reported") {
  const QuadratureGrid g(64);
  // Two distinct interfaces sharing every node.
  const FourierBoundary a(1.0);
  const FourierBoundary c(1.0, {0.0, 0.0, 1e-14});
  CHECK_THROWS_AS(s_integral(1.0, a, c, g), qgsw::InterfaceCollision);
  CHECK_THROWS_AS(g_functional(1.0, 0.5, 0.0, FourierBoundary(1.0),
                               FourierBoundary(0.5, {0.0, 0.0, 0.3}), g),
                  BallGuardViolation);
}

TEST_CASE("trivial solution for every angular velocity") {
  const QuadratureGrid g(256);
  double worst = 0;
  for (double l : {0.5, 1.0, 2.0}) {
    for (double b : {0.3, 0.5, 0.7}) {
      for (double om : {-0.5, 0.0, 0.5}) {
        worst = std::max(worst, g_functional(l, b, om, FourierBoundary(1.0), FourierBoundary(b), g).max_abs());
      }
    }
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("reversed inner orientation breaks the trivial solution") {
  ContourOptions bad;
  bad.reverse_inner_orientation = true;
  const auto g = g_functional(1.0, 0.5, 0.2, FourierBoundary(1.0), FourierBoundary(0.5), QuadratureGrid(64), bad);
  CHECK(g.max_abs() > 1e-3);
}

TEST_CASE("g_functional is affine in omega") {
  const QuadratureGrid g(128);
  const auto f1 = smooth_outer();
  const auto f2 = smooth_inner();
  const auto a = g_functional(1.0, 0.5, 0.3, f1, f2, g);
  const auto c = g_functional(1.0, 0.5, -0.1, f1, f2, g);
  const auto p1 = conformal_eval(f1, g);
  const auto p2 = conformal_eval(f2, g);
  for (int k = 0; k < 128; ++k) {
    const cplx wb = std::conj(g.nodes()[k]);
    const double d1 = 0.4 * std::imag(p1.value[k] * wb * std::conj(p1.derivative[k]));
    const double d2 = 0.4 * std::imag(p2.value[k] * wb * std::conj(p2.derivative[k]));
    CHECK(std::abs(a.g1[k] - c.g1[k] - d1) < 1e-14);
    CHECK(std::abs(a.g2[k] - c.g2[k] - d2) < 1e-14);
  }
}

TEST_CASE("outputs lie in the sine space and respect the fold") {
  const int m = 5;
  const QuadratureGrid g(320);
  FourierBoundary f1 = outer_mode(m, 0.01);
  f1.set_coefficient(2 * m - 1, 0.0005);
  FourierBoundary f2 = FourierBoundary::single_mode(0.5, m - 1, -0.002);
  const auto out = g_functional(1.0, 0.5, 0.16, f1, f2, g);
  for (const auto* v : {&out.g1, &out.g2}) {
    const ModeEnergy e = mode_energy(*v, g, m);
    CHECK(e.mean <= 1e-24);
    CHECK(e.cosine <= 1e-22);
    CHECK(e.off_lattice < 1e-22);
    CHECK(std::abs(mean_value(*v)) <= 1e-12);
  }
  ContourOptions folded;
  folded.fold = m;
  const auto fast = g_functional(1.0, 0.5, 0.16, f1, f2, g, folded);
  for (int k = 0; k < 320; ++k) {
    CHECK(std::abs(fast.g1[k] - out.g1[k]) < 1e-15);
    CHECK(std::abs(fast.g2[k] - out.g2[k]) < 1e-15);
  }
  folded.fold = 3;
  CHECK_THROWS_AS(g_functional(1.0, 0.5, 0.16, f1, f2, g, folded), PreconditionError);
}

TEST_CASE("g_functional rejects mismatched scales") {
  const QuadratureGrid g(64);
  CHECK_THROWS_AS(g_functional(1.0, 0.5, 0.0, FourierBoundary(1.0), FourierBoundary(0.4), g), PreconditionError);
}

TEST_CASE("linearization matches the multiplier matrix") {
  const QuadratureGrid g(256);
  for (int n = 1; n <= 12; ++n) {
    const auto r = linearization_check(n, 1.0, 0.5, 0.2, 1e-6, g);
    CHECK(r.max_deviation < 1e-6);
    CHECK(r.leakage < 1e-9);
  }
  const auto r6 = linearization_check(6, 1.0, 0.5, 0.2, 1e-6, g);
  const oracle::Matrix o = oracle::multiplier(6, 1.0, 0.5, 0.2);
  CHECK(std::abs(r6.recovered[0][0] - o.m11) < 1e-6);
  CHECK(std::abs(r6.recovered[0][1] - o.m12) < 1e-6);
  CHECK(std::abs(r6.recovered[1][0] - o.m21) < 1e-6);
  CHECK(std::abs(r6.recovered[1][1] - o.m22) < 1e-6);
  CHECK_THROWS_AS(linearization_check(6, 1.0, 0.5, 0.2, 1e-2, g), PreconditionError);
}

TEST_CASE("linearization error is second order in the step") {
  const QuadratureGrid g(256);
  const auto a = linearization_check(6, 1.0, 0.5, 0.2, 1e-4, g);
  const auto c = linearization_check(6, 1.0, 0.5, 0.2, 5e-5, g);
  const double ratio = a.max_deviation / c.max_deviation;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("velocity field") {
  const QuadratureGrid g(256), g2(512);
  const FourierBoundary f1(1.0), f2(0.5);
  CHECK(std::abs(velocity_at(0.0, f1, f2, 1.0, 0.5, g)) < 1e-15);
  const cplx v = velocity_at(0.75, f1, f2, 1.0, 0.5, g);
  CHECK(std::abs(v.real()) < 1e-15);
  CHECK(std::abs(v.imag()) > 1e-3);
  CHECK(std::abs(v - velocity_at(0.75, f1, f2, 1.0, 0.5, g2)) < 1e-10);
  CHECK_THROWS_AS(velocity_at(cplx(0.5 + 1e-10, 0), f1, f2, 1.0, 0.5, g), NearBoundary);
}

TEST_CASE("refined evaluation") {
  const auto r = g_functional_refined(1.0, 0.5, 0.1, smooth_outer(), smooth_inner(), 64);
  CHECK(r.change < 1e-10);
  CHECK(r.node_count >= 128);
  CHECK(r.node_count <= 4096);
}
