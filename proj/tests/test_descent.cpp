#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsc/descent.hpp"
#include "hsc/halfwave.hpp"
#include "hsc/model.hpp"
#include "oracles.hpp"

using namespace hsc;
using oracle::ld;

namespace {
Eigen::VectorXd sample(const Eigen::VectorXd& x, const std::function<double(double)>& f) {
  Eigen::VectorXd v(x.size());
  for (int i = 0; i < x.size(); ++i) v(i) = f(x(i));
  return v;
}

StateVector even_state(const RadialGrid& g, const std::function<double(double)>& a,
                       const std::function<double(double)>& b) {
  return {sample(g.eta(), a), sample(g.eta(), b), Parity::even};
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

double rel_diff(const StateVector& a, const StateVector& b) {
  return (a.stacked() - b.stacked()).norm() / std::max(1e-300, b.stacked().norm());
}

double fitted_exponent(const std::vector<double>& t, const std::vector<double>& v) {
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double n = t.size();
  for (size_t i = 0; i < t.size(); ++i) {
    const double l = std::log(v[i]);
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
  }
  return (n * stl - st * sl) / (n * stt - st * st);
}

// Ten smooth even pairs.
std::vector<std::pair<std::function<double(double)>, std::function<double(double)>>> suite() {
  using F = std::function<double(double)>;
  std::vector<std::pair<F, F>> s;
  s.emplace_back([](double x) { return std::exp(-x * x); }, [](double x) { return x * x * std::exp(-x * x); });
  s.emplace_back([](double x) { return std::cos(x); }, [](double) { return 0.0; });
  s.emplace_back([](double) { return 0.0; }, [](double x) { return std::cos(2 * x); });
  s.emplace_back([](double x) { return 1.0 / (1.0 + x * x); }, [](double x) { return std::exp(-2 * x * x); });
  s.emplace_back([](double x) { return 1.0 + x * x * x * x; }, [](double x) { return x * x - 1.0; });
  s.emplace_back([](double x) { return std::cosh(0.5 * x); }, [](double x) { return std::cos(x) * std::exp(-x * x); });
  s.emplace_back([](double x) { return std::exp(-3 * x * x) * (1 + x * x); }, [](double) { return 1.0; });
  s.emplace_back([](double x) { return std::cos(3 * x); }, [](double x) { return std::sin(x) * x; });
  s.emplace_back([](double x) { return 1.0 / (2.0 + x * x); }, [](double x) { return 1.0 / (3.0 + x * x); });
  s.emplace_back([](double x) { return std::exp(-0.5 * x * x) * std::cos(x); }, [](double x) { return std::exp(-x * x / 3); });
  return s;
}

// The same ten pairs in quad precision.
std::vector<std::pair<QuadFunction, QuadFunction>> quad_suite() {
  using F = QuadFunction;
  using Q = const Quad&;
  std::vector<std::pair<F, F>> s;
  s.emplace_back([](Q x) { return exp(-x * x); }, [](Q x) { return x * x * exp(-x * x); });
  s.emplace_back([](Q x) { return cos(x); }, [](Q) { return Quad(0); });
  s.emplace_back([](Q) { return Quad(0); }, [](Q x) { return cos(2 * x); });
  s.emplace_back([](Q x) { return 1 / (1 + x * x); }, [](Q x) { return exp(-2 * x * x); });
  s.emplace_back([](Q x) { return 1 + x * x * x * x; }, [](Q x) { return x * x - 1; });
  s.emplace_back([](Q x) { return cosh(x / 2); }, [](Q x) { return cos(x) * exp(-x * x); });
  s.emplace_back([](Q x) { return exp(-3 * x * x) * (1 + x * x); }, [](Q) { return Quad(1); });
  s.emplace_back([](Q x) { return cos(3 * x); }, [](Q x) { return sin(x) * x; });
  s.emplace_back([](Q x) { return 1 / (2 + x * x); }, [](Q x) { return 1 / (3 + x * x); });
  s.emplace_back([](Q x) { return exp(-x * x / 2) * cos(x); }, [](Q x) { return exp(-x * x / 3); });
  return s;
}

// Third-order one-sided derivative at s = 0 from samples at 0, e, 2e, 3e.
Eigen::VectorXd forward_derivative(const Eigen::VectorXd& x0, const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b, const Eigen::VectorXd& c, double e) {
  return (-11.0 * x0 + 18.0 * a - 9.0 * b + 2.0 * c) / (6.0 * e);
}

// Independent oracle for the kernel weights: integrand of the raw Duhamel
// form after integration by parts.
struct RawKernels {
  int d;
  ld r10(ld e) const { return ((d - 3) - e * oracle::hpp(e) / oracle::hp(e)) / (e * e); }
  ld r11(ld e) const {
    const ld h = oracle::h(e), hp = oracle::hp(e);
    return (2 * e * hp - h - h * hp * hp) / (e * hp - h) / e;
  }
  ld r20(ld e) const {
    const ld h = oracle::h(e), hp = oracle::hp(e);
    return (1 - hp * hp) / (e * hp - h) * hp / e;
  }
  ld phi11(ld e) const { return oracle::h(e) / std::pow(e, d - 2); }
  ld phi12(ld e) const { return 1 / std::pow(e, d - 2); }
  ld W(ld e) const { return -oracle::hp(e) / std::pow(e, 2 * (d - 2)); }
  ld t11(ld e) const {
    auto f = [&](ld x) { return phi12(x) * r11(x) / W(x); };
    return (phi12(e) * r10(e) / W(e) - oracle::derivative(f, e, 1, 1e-3L)) / std::pow(e, d - 3);
  }
  ld t12(ld e) const {
    auto f = [&](ld x) { return phi11(x) * r11(x) / W(x); };
    return (phi11(e) * r10(e) / W(e) - oracle::derivative(f, e, 1, 1e-3L)) / std::pow(e, d - 3);
  }
  ld t21(ld e) const { return phi12(e) * r20(e) / W(e) / std::pow(e, d - 3); }
  ld t22(ld e) const { return phi11(e) * r20(e) / W(e) / std::pow(e, d - 3); }
};
}  // namespace

TEST_CASE("kernel data") {
  for (int d : {5, 7, 9}) {
    const DescentKernelData K{d};
    const RawKernels raw{d};
    for (double e : {0.3, 0.7, 1.2, 1.8}) {
      auto p11 = [&](ld x) { return ld(K.phi11(double(x))); };
      auto p12 = [&](ld x) { return ld(K.phi12(double(x))); };
      const double W = double(p11(e) * oracle::derivative(p12, e, 1, 1e-3L) -
                              oracle::derivative(p11, e, 1, 1e-3L) * p12(e));
      CHECK(std::abs(W / K.wronskian(e) - 1.0) < 1e-10);
      CHECK(K.t22(e) == doctest::Approx(height_eval(e).h * K.t21(e)).epsilon(1e-15));
      CHECK(K.t11(e) == doctest::Approx(double(raw.t11(e))).epsilon(1e-9));
      CHECK(K.t12(e) == doctest::Approx(double(raw.t12(e))).epsilon(1e-9));
      CHECK(K.t21(e) == doctest::Approx(double(raw.t21(e))).epsilon(1e-12));
      CHECK(K.t22(e) == doctest::Approx(double(raw.t22(e))).epsilon(1e-12));
      CHECK(K.t11(-e) == doctest::Approx(K.t11(e)).epsilon(1e-14));
      CHECK(K.t12(-e) == doctest::Approx(K.t12(e)).epsilon(1e-14));
    }
    CHECK(K.t11(0.0) != 0.0);
    CHECK(K.t12(0.0) != 0.0);
    CHECK(K.t21(0.0) != 0.0);
    CHECK(K.t22(0.0) != 0.0);
    CHECK(K.phi21(0.8) == doctest::Approx((d - 3) * K.phi11(0.8)));
    CHECK(K.phi22(0.8) == doctest::Approx((d - 2) * K.phi12(0.8)));
  }
}

TEST_CASE("descent steps on explicit data") {
  RadialGrid g(2.0, 48, Parity::even);
  const int M = g.half_size();
  const StateVector one{Eigen::VectorXd::Ones(M), Eigen::VectorXd::Zero(M), Parity::even};
  const auto s7 = descent_step(g, 7, one);
  CHECK(max_abs(s7.f1.array() - 5.0) < 1e-11);
  CHECK(max_abs(s7.f2) < 1e-11);
  const auto s3 = descent_step(g, 3, one);
  CHECK(s3.parity == Parity::odd);
  CHECK(max_abs(s3.f1 - g.x()) < 1e-14);
  CHECK(max_abs(s3.f2 + g.x()) < 1e-14);
  // eta = 1 is the node k = 32 of the full grid when N = 48.
  const StateVector sq = even_state(g, [](double x) { return x * x; }, [](double) { return 0.0; });
  const auto ssq = descent_step(g, 7, sq);
  const ld h1 = oracle::h(1.0L), hp1 = oracle::hp(1.0L);
  const ld c1 = -h1 / (hp1 - h1);
  const int i1 = 32 - 24;
  REQUIRE(g.eta()(i1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ssq.f1(i1) == doctest::Approx(double(5 + 2 * c1)).epsilon(1e-12));

  const auto full = descent_full(g, 7, one);
  CHECK(max_abs(full.f1 - 15.0 * g.x()) < 1e-10);
  CHECK(max_abs(full.f2 + 15.0 * g.x()) < 1e-10);
  const auto f3 = descent_full(g, 3, one);
  CHECK(max_abs(f3.stacked() - s3.stacked()) == 0.0);

  CHECK_THROWS_AS(descent_step(g, 4, one), std::invalid_argument);
  CHECK_THROWS_AS(descent_step(g, 1, one), std::invalid_argument);
  StateVector tagged = one;
  tagged.parity = Parity::odd;
  CHECK_THROWS_AS(descent_step(g, 7, tagged), std::invalid_argument);
  CHECK_THROWS_AS(descent_step_inverse(g, 3, one), std::invalid_argument);
  StateVector notodd{Eigen::VectorXd::Ones(49), Eigen::VectorXd::Zero(49), Parity::odd};
  CHECK_THROWS_AS(descent_step_inverse(g, 3, notodd), std::invalid_argument);
}

TEST_CASE("inverse descent") {
  RadialGrid g(1.0, 64, Parity::even);
  const int M = g.half_size();
  StateVector yy{g.x(), -g.x(), Parity::odd};
  const auto inv3 = descent_step_inverse(g, 3, yy);
  CHECK(max_abs(inv3.f1.array() - 1.0) < 1e-13);
  CHECK(max_abs(inv3.f2) < 1e-13);
  const StateVector five{Eigen::VectorXd::Constant(M, 5.0), Eigen::VectorXd::Zero(M), Parity::even};
  const auto inv7 = descent_step_inverse(g, 7, five);
  CHECK(max_abs(inv7.f1.array() - 1.0) < 1e-9);
  CHECK(max_abs(inv7.f2) < 1e-9);

  const QuadVector eta = quad_half_nodes(g);
  const auto qs = quad_suite();
  const auto ds = suite();
  for (int d : {3, 5, 7, 9}) {
    double worst_left = 0.0, worst_right = 0.0;
    const QuadMatrix D = descent_full_matrix_quad(g, d), Dinv = descent_full_inverse_matrix_quad(g, d);
    for (size_t j = 0; j < qs.size(); ++j) {
      const auto& [a, b] = ds[j];
      const StateVector v = even_state(g, a, b);
      worst_left = std::max(worst_left, rel_diff(descent_full_inverse(g, d, descent_full(g, d, v)), v));
      // D_d D_d^{-1} on one-dimensional data in the range of D_d, built in quad
      // precision: rounding the data to double would feed noise to up to d - 2
      // derivatives.
      QuadVector x(2 * M);
      for (int i = 0; i < M; ++i) {
        x(i) = qs[j].first(eta(i));
        x(M + i) = qs[j].second(eta(i));
      }
      const QuadVector w = D * x;
      const QuadVector back = D * (Dinv * w);
      worst_right = std::max(worst_right, static_cast<double>((back - w).norm() / w.norm()));
      if (d > 3) {
        const auto st = descent_step(g, d, descent_step_inverse(g, d, v));
        CHECK(rel_diff(st, v) < 1e-9);
      }
    }
    MESSAGE("d=" << d << " round trips " << worst_left << " " << worst_right);
    CHECK(worst_left < 1e-8);
    CHECK(worst_right < 1e-8);
  }
}

TEST_CASE("boundedness of the T22 block") {
  std::vector<double> ratios;
  for (int N : {48, 96}) {
    RadialGrid g(2.0, N, Parity::even);
    const int d = 7, k = 2;
    const auto B = descent_inverse_blocks(g, d);
    double worst = 0.0;
    for (const auto& [a, b] : suite()) {
      const Eigen::VectorXd g2 = sample(g.eta(), b);
      if (g2.norm() == 0.0) continue;
      const Eigen::VectorXd Tg = B.T22 * g2;
      worst = std::max(worst, weighted_sobolev_norm(g, Tg, k, d) /
                                  weighted_sobolev_norm(g, g2, k - 1, d - 2));
    }
    ratios.push_back(worst);
  }
  MESSAGE("T22 constants " << ratios[0] << " " << ratios[1]);
  CHECK(std::abs(ratios[0] / ratios[1] - 1.0) < 0.1);
}

TEST_CASE("norm equivalence of the composite descent") {
  const int k = 2;
  for (int d : {5, 7}) {
    std::vector<double> lo, hi;
    for (int N : {64, 128}) {
      RadialGrid g(2.0, N, Parity::even);
      double l = 1e300, h = 0.0;
      for (const auto& [a, b] : suite()) {
        const StateVector v = even_state(g, a, b);
        const auto w = descent_full(g, d, v);
        const double r = (full_sobolev_norm(g, w.f1, k) + full_sobolev_norm(g, w.f2, k - 1)) /
                         state_norm(g, v, k + (d - 3) / 2, d);
        l = std::min(l, r);
        h = std::max(h, r);
      }
      lo.push_back(l);
      hi.push_back(h);
    }
    MESSAGE("d=" << d << " descent norm ratios in [" << lo[0] << ", " << hi[0] << "]");
    CHECK(std::abs(lo[0] / lo[1] - 1.0) < 0.1);
    CHECK(std::abs(hi[0] / hi[1] - 1.0) < 0.1);
  }
}

TEST_CASE("intertwining identities") {
  RadialGrid g(1.0, 64, Parity::even), g2(1.0, 128, Parity::even);
  const QuadFunction one = [](const Quad&) { return Quad(1); };
  const QuadFunction zero = [](const Quad&) { return Quad(0); };
  for (int d : {3, 5, 7, 9}) CHECK(intertwining_residual(g, d, one, zero) < 1e-12);
  const QuadFunction gauss = [](const Quad& x) { return exp(-x * x); };
  CHECK(intertwining_residual(g, 5, gauss, zero) < 1e-8);
  CHECK(step_intertwining_residual(g, 7, gauss, zero) < 1e-8);
  for (int d : {3, 5, 7, 9}) {
    double worst = 0.0, worst2 = 0.0;
    for (const auto& [a, b] : quad_suite()) {
      worst = std::max(worst, intertwining_residual(g, d, a, b));
      worst2 = std::max(worst2, intertwining_residual(g2, d, a, b));
    }
    MESSAGE("d=" << d << " intertwining residual N=64 " << worst << ", N=128 " << worst2);
    CHECK(worst < 1e-8);
    CHECK(worst2 < worst);
  }
}

TEST_CASE("the one-dimensional generator drives S1") {
  RadialGrid g(1.0, 64, Parity::even);
  const StateVector v{sample(g.x(), [](double x) { return std::sin(x) * std::exp(-x * x); }),
                      sample(g.x(), [](double x) { return x / (1 + x * x); }), Parity::odd};
  const double e = 1e-3;
  const Eigen::VectorXd x = v.stacked();
  const Eigen::VectorXd deriv =
      forward_derivative(x, evolve_S1(g, v, e).stacked(), evolve_S1(g, v, 2 * e).stacked(),
                         evolve_S1(g, v, 3 * e).stacked(), e);
  const Eigen::VectorXd L1x = one_dim_generator_matrix(g) * x;
  CHECK(max_abs(deriv - L1x) < 1e-5 * max_abs(L1x));
}

TEST_CASE("free wave semigroup") {
  RadialGrid g(1.0, 64, Parity::even);
  const StateVector v = even_state(g, [](double x) { return std::exp(-2 * x * x); },
                                   [](double x) { return x * x * std::exp(-2 * x * x); });
  SUBCASE("trivial cases") {
    const int M = g.half_size();
    const StateVector z{Eigen::VectorXd::Zero(M), Eigen::VectorXd::Zero(M), Parity::even};
    CHECK(evolve_free_wave(g, 7, z, 1.0).stacked().norm() == 0.0);
    CHECK(rel_diff(evolve_free_wave(g, 7, v, 0.0), v) < 1e-10);
  }
  SUBCASE("semigroup law") {
    for (int d : {3, 5, 7}) {
      const auto ab = evolve_free_wave(g, d, v, 1.0);
      const auto a_b = evolve_free_wave(g, d, evolve_free_wave(g, d, v, 0.4), 0.6);
      CHECK((ab.stacked() - a_b.stacked()).norm() / v.stacked().norm() < 1e-8);
      const Eigen::VectorXd viaM = free_wave_matrix(g, d, 1.0) * v.stacked();
      CHECK((viaM - ab.stacked()).norm() / v.stacked().norm() < 1e-9);
    }
  }
  SUBCASE("generator") {
    // d/ds S_d at 0 agrees with L_d.
    const double e = 1e-3;
    const int d = 5;
    const Eigen::VectorXd x = v.stacked();
    const FreeWavePropagator S(g, d);
    const Eigen::VectorXd deriv =
        forward_derivative(x, S.evolve(v, e).stacked(), S.evolve(v, 2 * e).stacked(),
                           S.evolve(v, 3 * e).stacked(), e);
    const Eigen::VectorXd Lx = free_generator_matrix(g, d) * x;
    CHECK(max_abs(deriv - Lx) < 1e-5 * max_abs(Lx));
  }
  SUBCASE("finite-difference cross-check") {
    const int d = 5;
    const auto spectral = evolve_free_wave(g, d, v, 1.0);
    const auto fd = direct_fd_oracle(g, d, v, 1.0);
    const double rel = std::sqrt(g.half_weights().dot((spectral.f1 - fd.f1).cwiseAbs2()) +
                                 g.half_weights().dot((spectral.f2 - fd.f2).cwiseAbs2())) /
                       std::sqrt(g.half_weights().dot(spectral.f1.cwiseAbs2()) +
                                 g.half_weights().dot(spectral.f2.cwiseAbs2()));
    MESSAGE("FD relative L2 difference " << rel);
    CHECK(rel < 1e-4);
  }
  SUBCASE("growth exponent on bump and Gaussian data") {
    // Bumps supported well inside the ball are not resolved by the descent
    // route at N = 64 (the maps differentiate (d - 1) / 2 times), so the bumps
    // here are wider than the ball and resolution is checked against the FD
    // oracle first.
    auto bump = [](double width) {
      return [width](double x) {
        const double r = x / width;
        return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
      };
    };
    const std::vector<std::function<double(double)>> profiles{
        bump(1.5), bump(2.0), [](double x) { return std::exp(-4 * x * x); }};
    for (int d : {3, 5, 7, 9})
      for (size_t p = 0; p < profiles.size(); ++p) {
        const auto& prof = profiles[p];
        const StateVector b = even_state(g, prof, [&](double x) { return x * x * prof(x); });
        const FreeWavePropagator S(g, d);
        CHECK(rel_diff(S.evolve(b, 1.0), direct_fd_oracle(g, d, b, 1.0)) < 1e-4);
        std::vector<double> t, n;
        for (int i = 0; i <= 10; ++i) {
          t.push_back(0.5 * i);
          n.push_back(state_norm(g, S.evolve(b, 0.5 * i), (d - 1) / 2, d));
        }
        const double rate = fitted_exponent(t, n);
        MESSAGE("S_" << d << " fitted exponent " << rate << " for profile " << p);
        CHECK(rate <= 0.55);
      }
  }
}

TEST_CASE("finite-difference oracle") {
  RadialGrid g(2.0, 48, Parity::even);
  const int M = g.half_size();
  const StateVector one{Eigen::VectorXd::Ones(M), Eigen::VectorXd::Zero(M), Parity::even};
  const auto st = direct_fd_oracle(g, 5, one, 0.5, 100);
  CHECK(max_abs(st.f1.array() - 1.0) < 1e-12);
  CHECK(max_abs(st.f2) < 1e-12);
  CHECK_THROWS_AS(direct_fd_oracle(g, 5, one, 0.5, 100, 1.5), std::invalid_argument);
  // Second-order self-convergence.
  const StateVector v = even_state(g, [](double x) { return std::exp(-2 * x * x); }, [](double) { return 0.0; });
  const auto a = direct_fd_oracle(g, 5, v, 0.5, 50, 0.4, false);
  const auto b = direct_fd_oracle(g, 5, v, 0.5, 100, 0.4, false);
  const auto c = direct_fd_oracle(g, 5, v, 0.5, 200, 0.4, false);
  const double order = std::log2((a.stacked() - b.stacked()).norm() / (b.stacked() - c.stacked()).norm());
  MESSAGE("FD convergence order " << order);
  CHECK(order == doctest::Approx(2.0).epsilon(0.15));
}
