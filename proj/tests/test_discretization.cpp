#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsc/discretization.hpp"
#include "hsc/model.hpp"
#include "oracles.hpp"

using namespace hsc;

namespace {
Eigen::VectorXd sample(const Eigen::VectorXd& x, const std::function<double(double)>& f) {
  Eigen::VectorXd v(x.size());
  for (int i = 0; i < x.size(); ++i) v(i) = f(x(i));
  return v;
}

// Smooth even test family used for norm comparisons.
std::vector<std::function<oracle::ld(oracle::ld)>> even_suite() {
  std::vector<std::function<oracle::ld(oracle::ld)>> s;
  for (oracle::ld a : {0.5L, 1.0L, 2.0L, 4.0L})
    for (oracle::ld b : {0.0L, 0.5L, -0.3L})
      s.push_back([a, b](oracle::ld r) { return std::exp(-a * r * r) * (1 + b * r * r); });
  for (oracle::ld w : {0.5L, 1.0L, 2.0L})
    s.push_back([w](oracle::ld r) { return std::cos(w * r); });
  for (oracle::ld c : {0.5L, 1.0L, 3.0L})
    s.push_back([c](oracle::ld r) { return 1 / (1 + c * r * r); });
  s.push_back([](oracle::ld r) { return 1 + r * r * r * r; });
  s.push_back([](oracle::ld r) { return std::cosh(0.7L * r); });
  return s;
}
}  // namespace

TEST_CASE("grid construction and validation") {
  CHECK_THROWS_AS(RadialGrid(0.4, 32), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid(1.0, 6), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid(1.0, 33), std::invalid_argument);
  RadialGrid g(2.0, 64, Parity::even);
  CHECK(g.half_size() == 33);
  CHECK(g.eta()(0) == 0.0);
  CHECK(g.eta()(32) == doctest::Approx(2.0));
  for (int i = 1; i < g.half_size(); ++i) CHECK(g.eta()(i) > g.eta()(i - 1));
  for (int i = 1; i <= 64; ++i) CHECK(g.x()(i) > g.x()(i - 1));
}

TEST_CASE("differentiation is exact on polynomials") {
  RadialGrid g(2.0, 64, Parity::even);
  const Eigen::VectorXd e = g.eta();
  const Eigen::VectorXd sq = e.cwiseAbs2();
  CHECK((g.D1() * sq - 2.0 * e).cwiseAbs().maxCoeff() < 1e-10);
  for (int k = 1; k <= 8; ++k) {
    const Parity p = k % 2 ? Parity::odd : Parity::even;
    const Eigen::VectorXd f = e.array().pow(k);
    const Eigen::VectorXd df = k * e.array().pow(k - 1);
    CHECK((g.D1(p) * f - df).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd ff = g.x().array().pow(k);
    CHECK((g.D1(Parity::none) * ff - k * g.x().array().pow(k - 1).matrix()).cwiseAbs().maxCoeff() <
          1e-10);
    if (k >= 2) {
      const Eigen::VectorXd d2 = k * (k - 1) * e.array().pow(k - 2);
      CHECK((g.D2(p) * f - d2).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, d2.cwiseAbs().maxCoeff()) * 64 * 64);
    }
  }
  // Constants are annihilated on the full grid and in the even sector.
  CHECK((g.D1(Parity::none) * Eigen::VectorXd::Ones(65)).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((g.D1(Parity::even) * Eigen::VectorXd::Ones(33)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("quadrature and antiderivative") {
  RadialGrid g(2.0, 64, Parity::even);
  const Eigen::VectorXd e6 = g.eta().array().pow(6);
  CHECK(g.half_weights().dot(e6) == doctest::Approx(128.0 / 7.0).epsilon(1e-13));
  for (int deg = 0; deg <= 63; ++deg) {
    const Eigen::VectorXd p = (g.x() / 2.0).array().pow(deg);
    const double exact = deg % 2 ? 0.0 : 2.0 * 2.0 / (deg + 1);
    CHECK(std::abs(g.full_weights().dot(p) - exact) < 1e-12 * std::max(1.0, exact) + 1e-13);
  }
  const Eigen::VectorXd c = sample(g.x(), [](double x) { return std::cos(x); });
  const Eigen::VectorXd s = sample(g.x(), [](double x) { return std::sin(x); });
  CHECK((g.antiderivative() * c - s).cwiseAbs().maxCoeff() < 1e-13);
  auto [xc, wc] = clenshaw_curtis(20, 0.0, 1.0);
  CHECK(wc.dot(xc.array().exp().matrix()) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("folding, unfolding and interpolation") {
  RadialGrid g(1.5, 48, Parity::even);
  const Eigen::VectorXd f = sample(g.eta(), [](double x) { return std::exp(-x * x); });
  const Eigen::VectorXd full = g.unfold(f, Parity::even);
  CHECK(g.parity_defect(full, Parity::even) == 0.0);
  CHECK((g.fold(full) - f).norm() == 0.0);
  CHECK(g.interpolate(full, 0.3137) == doctest::Approx(std::exp(-0.3137 * 0.3137)).epsilon(1e-13));
  Eigen::VectorXd pts(3);
  pts << -1.2, 0.01, 1.49;
  const Eigen::VectorXd vi = g.half_interpolation_matrix(pts, Parity::even) * f;
  for (int i = 0; i < 3; ++i) CHECK(vi(i) == doctest::Approx(std::exp(-pts(i) * pts(i))).epsilon(1e-13));
  const Eigen::VectorXd o = sample(g.eta(), [](double x) { return std::sin(x); });
  const Eigen::VectorXd vo = g.half_interpolation_matrix(pts, Parity::odd) * o;
  for (int i = 0; i < 3; ++i) CHECK(vo(i) == doctest::Approx(std::sin(pts(i))).epsilon(1e-13));
}

TEST_CASE("weighted Sobolev norm: direct values") {
  RadialGrid g(1.0, 32, Parity::even);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(g.half_size());
  CHECK(weighted_sobolev_norm(g, one, 0, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(weighted_sobolev_norm(g, one, 0, 3) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-13));
  CHECK_THROWS_AS(weighted_sobolev_norm(g, one, 9, 3), std::invalid_argument);
  // Monotone in k and in R.
  for (int d : {3, 5, 7}) {
    double prev = 0.0;
    for (int k = 0; k <= 4; ++k) {
      const Eigen::VectorXd f = sample(g.eta(), [](double x) { return std::exp(-x * x); });
      const double n = weighted_sobolev_norm(g, f, k, d);
      CHECK(n >= prev);
      prev = n;
    }
    RadialGrid big(2.0, 32, Parity::even);
    const Eigen::VectorXd fb = sample(big.eta(), [](double x) { return std::exp(-x * x); });
    const Eigen::VectorXd fs = sample(g.eta(), [](double x) { return std::exp(-x * x); });
    CHECK(weighted_sobolev_norm(big, fb, 2, d) > weighted_sobolev_norm(g, fs, 2, d));
  }
}

TEST_CASE("weighted norm against the direct d-dimensional norm") {
  const double R = 2.0;
  RadialGrid g1(R, 48, Parity::even), g2(R, 96, Parity::even);
  const auto suite = even_suite();
  CHECK(suite.size() == 20);
  for (int d : {3, 5, 7}) {
    for (int k = 0; k <= 2; ++k) {
      double lo = 1e300, hi = 0.0;
      for (const auto& f : suite) {
        auto fd = [&](double x) { return double(f(x)); };
        const double direct = double(oracle::direct_radial_norm(f, d, k, R));
        const double w1 = weighted_sobolev_norm(g1, sample(g1.eta(), fd), k, d);
        const double w2 = weighted_sobolev_norm(g2, sample(g2.eta(), fd), k, d);
        const double r1 = direct / w1, r2 = direct / w2;
        CHECK(std::abs(r1 / r2 - 1.0) < 0.1);
        lo = std::min(lo, r1);
        hi = std::max(hi, r1);
      }
      MESSAGE("d=" << d << " k=" << k << " direct/weighted in [" << lo << ", " << hi << "]");
      CHECK(lo > 0.0);
      CHECK(hi / lo < 1e3);
    }
  }
}

TEST_CASE("h-weighted inner products") {
  RadialGrid g(1.0, 48, Parity::none);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(49);
  CHECK(hpm_inner(g, one, one, +1) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(hpm_inner(g, one, one, -1) == doctest::Approx(2.0).epsilon(1e-13));
  const Eigen::VectorXd f = sample(g.x(), [](double x) { return std::exp(x) * std::sin(3 * x); });
  CHECK(hpm_inner(g, f, f, +1) > 0.0);
  CHECK(hpm_inner(g, f, f, -1) > 0.0);
  CHECK(hpm_inner(g, Eigen::VectorXd::Zero(49), Eigen::VectorXd::Zero(49), 1) == 0.0);
  // Reflection relates the two signs.
  Eigen::VectorXd fr = f.reverse();
  CHECK(hpm_inner(g, f, f, +1) == doctest::Approx(hpm_inner(g, fr, fr, -1)).epsilon(1e-13));
}

TEST_CASE("extension operator") {
  RadialGrid g(1.0, 48, Parity::none);
  Eigen::VectorXd pts(7);
  pts << -1.9, -1.3, -0.5, 0.2, 1.05, 1.6, 2.5;
  CHECK(extension_operator(g, Eigen::VectorXd::Zero(49), 2, pts).norm() == 0.0);
  // Data supported in B_{R/2} extends by zero.
  auto bump = [](double x) {
    return std::abs(x) < 0.45 ? std::exp(1.0 - 1.0 / (1.0 - x * x / 0.2025)) : 0.0;
  };
  const Eigen::VectorXd eb = extension_operator(bump, 1.0, 3, pts);
  for (int i : {0, 1, 4, 5, 6}) CHECK(eb(i) == 0.0);
  CHECK(eb(2) == bump(-0.5));
  CHECK(eb(3) == bump(0.2));
  CHECK(eb(6) == 0.0);
  // x^2 extends C^2 across the seams: one-sided FD derivatives match.
  const Eigen::VectorXd sq = g.x().cwiseAbs2();
  for (double side : {1.0, -1.0}) {
    const double hh = 1e-3;
    auto E = [&](double x) {
      Eigen::VectorXd p(1);
      p << x;
      return extension_operator(g, sq, 2, p)(0);
    };
    const double x0 = side;
    auto d1 = [&](double s) { return (-3 * E(x0) + 4 * E(x0 + s * hh) - E(x0 + 2 * s * hh)) / (2 * s * hh); };
    auto d2 = [&](double s) {
      return (2 * E(x0) - 5 * E(x0 + s * hh) + 4 * E(x0 + 2 * s * hh) - E(x0 + 3 * s * hh)) / (hh * hh);
    };
    CHECK(std::abs(d1(1.0) - d1(-1.0)) < 1e-5);
    CHECK(std::abs(d2(1.0) - d2(-1.0)) < 1e-2);
    CHECK(E(x0 + side * 0.9) == 0.0);
  }
  // Outside norm controlled by the annulus norm, on a small suite.
  RadialGrid big(2.0, 96, Parity::none);
  for (double w : {1.0, 2.0, 3.0}) {
    const Eigen::VectorXd f = sample(g.x(), [&](double x) { return std::cos(w * x) + x; });
    const Eigen::VectorXd ef = extension_operator(g, f, 2, big.x());
    Eigen::VectorXd outside = ef, annulus = sample(big.x(), [&](double x) {
      return std::abs(x) > 0.5 && std::abs(x) <= 1.0 ? std::cos(w * x) + x : 0.0;
    });
    for (int i = 0; i < outside.size(); ++i)
      if (std::abs(big.x()(i)) <= 1.0) outside(i) = 0.0;
    const double no = std::sqrt(big.full_weights().dot(outside.cwiseAbs2()));
    const double na = std::sqrt(big.full_weights().dot(annulus.cwiseAbs2()));
    CHECK(no <= 20.0 * na);
  }
}

TEST_CASE("Hardy inequality and integral operator") {
  RadialGrid g(1.0, 32, Parity::none);
  const Eigen::VectorXd sq = g.x().cwiseAbs2();
  auto [lhs, rhs] = hardy_check(g, sq, -1.0);
  CHECK(lhs == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-10));
  CHECK(rhs == doctest::Approx(2.0 * std::sqrt(2.0 / 3.0)).epsilon(1e-10));
  CHECK(lhs <= rhs);
  CHECK_THROWS_AS(hardy_check(g, sq, -0.25), std::invalid_argument);
  // Constant 2/|2s+1| from integration by parts, on a small suite.
  for (double s : {-0.75, -1.0, -1.5}) {
    for (double w : {1.0, 2.5}) {
      const Eigen::VectorXd f = sample(g.x(), [&](double x) { return x * x * std::cos(w * x); });
      auto [l, r] = hardy_check(g, f, s);
      CHECK(l <= 2.0 / std::abs(2 * s + 1) * r * (1 + 1e-10));
    }
  }
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(33);
  for (int n : {0, 2, 3}) {
    const Eigen::VectorXd Tf = integral_op_T(g, one, n, n, [](double) { return 1.0; });
    CHECK((Tf - g.x() / (n + 1.0)).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK(integral_op_T(g, Eigen::VectorXd::Zero(33), 1, 1, [](double) { return 1.0; }).norm() == 0.0);
  CHECK_THROWS_AS(integral_op_T(g, one, 3, 1, [](double) { return 1.0; }), std::invalid_argument);
  // H^k bound ||Tf|| <= C ||f|| on a suite, constant reported.
  double worst = 0.0;
  for (double w : {1.0, 2.0, 4.0}) {
    const Eigen::VectorXd f = sample(g.x(), [&](double x) { return std::sin(w * x) + 1.0; });
    const Eigen::VectorXd Tf = integral_op_T(g, f, 2, 2, [](double y) { return std::exp(y); });
    worst = std::max(worst, full_sobolev_norm(g, Tf, 2) / full_sobolev_norm(g, f, 2));
  }
  MESSAGE("integral operator H^2 ratio " << worst);
  CHECK(worst < 10.0);
}
