#include "hsc/halfwave.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "hsc/model.hpp"

namespace hsc {

namespace {
struct Coefs {
  Eigen::VectorXd hp, hm, dhp, dhm, w;  // h+, h-, h+', h-', y h' - h
};

Coefs coefs(const RadialGrid& g) {
  const int n = g.N() + 1;
  Coefs c{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n),
          Eigen::VectorXd(n)};
  for (int k = 0; k < n; ++k) {
    const double y = g.x()(k);
    const auto v = height_eval(y);
    c.hp(k) = y + v.h;
    c.hm(k) = y - v.h;
    c.dhp(k) = 1.0 + v.hp;
    c.dhm(k) = 1.0 - v.hp;
    c.w(k) = y * v.hp - v.h;
  }
  return c;
}

double scale_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
}
}  // namespace

double halfwave_parity_defect(const HalfWaveState& w) {
  return (w.vm.reverse() + w.vp).cwiseAbs().maxCoeff();
}

Eigen::VectorXd apply_L_pm(const RadialGrid& g, const Eigen::VectorXd& f, int sign) {
  const auto c = coefs(g);
  const Eigen::VectorXd df = g.D1(Parity::none) * f;
  const Eigen::VectorXd& num = sign > 0 ? c.hp : c.hm;
  const Eigen::VectorXd& den = sign > 0 ? c.dhp : c.dhm;
  return -(num.array() / den.array() * df.array()).matrix();
}

Eigen::VectorXd apply_D_pm(const RadialGrid& g, const Eigen::VectorXd& f, int sign) {
  const auto c = coefs(g);
  const Eigen::VectorXd df = g.D1(Parity::none) * f;
  const Eigen::VectorXd& den = sign > 0 ? c.dhp : c.dhm;
  return (df.array() / den.array()).matrix();
}

HalfWaveState halfwave_decompose(const RadialGrid& g, const StateVector& v) {
  const double tol = 1e-10 * scale_of(v.f1, v.f2);
  if (g.parity_defect(v.f1, Parity::odd) > tol || g.parity_defect(v.f2, Parity::odd) > tol)
    throw std::invalid_argument("half-wave decomposition needs odd components");
  const auto c = coefs(g);
  const Eigen::VectorXd d1 = g.D1(Parity::none) * v.f1;
  HalfWaveState w;
  w.vp = ((c.hm.array() * d1.array() + c.dhm.array() * v.f2.array()) / c.w.array()).matrix();
  // For odd input the v_- formula at -y is exactly -v_+(y); use it to keep P v_- = -v_+.
  w.vm = -w.vp.reverse();
  return w;
}

StateVector halfwave_recompose(const RadialGrid& g, const HalfWaveState& w) {
  if (halfwave_parity_defect(w) > 1e-10 * scale_of(w.vm, w.vp))
    throw std::invalid_argument("half-wave state violates the parity constraint");
  const auto c = coefs(g);
  const Eigen::VectorXd integrand =
      (-c.dhm.array() * w.vm.array() + c.dhp.array() * w.vp.array()).matrix();
  StateVector v;
  v.parity = Parity::odd;
  v.f1 = 0.5 * g.antiderivative() * integrand;
  v.f2 = 0.5 * (c.hm.array() * w.vm.array() - c.hp.array() * w.vp.array()).matrix();
  return v;
}

double characteristic_foot(double y, double ds, int sign) {
  const double root = sign > 0 ? 0.5 : -0.5;
  auto hpm = [sign](double z) {
    const auto v = height_eval(z);
    return std::pair{z + sign * v.h, 1.0 + sign * v.hp};
  };
  const double target = std::exp(-ds) * hpm(y).first;
  if (ds == 0.0 || y == root) return y;
  const double lo = std::min(y, root), hi = std::max(y, root);
  std::uintmax_t iters = 60;
  const double z = boost::math::tools::newton_raphson_iterate(
      [&](double z) {
        const auto [v, dv] = hpm(z);
        return std::pair{v - target, dv};
      },
      0.5 * (lo + hi), lo, hi, std::numeric_limits<double>::digits - 3, iters);
  return z;
}

Eigen::MatrixXd transport_matrix(const RadialGrid& g, double ds, int sign) {
  const int n = g.N() + 1;
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) {
    z(k) = characteristic_foot(g.x()(k), ds, sign);
    // The foot lies between y and +-1/2, hence inside [-R, R] for R >= 1/2.
    if (std::abs(z(k)) > g.R() * (1.0 + 1e-14))
      throw std::logic_error("characteristic foot left the grid window");
  }
  return g.interpolation_matrix(z);
}

HalfWaveState evolve_halfwave(const RadialGrid& g, const HalfWaveState& w, double ds) {
  return {transport_matrix(g, ds, -1) * w.vm, transport_matrix(g, ds, +1) * w.vp};
}

Eigen::MatrixXd s1_matrix(const RadialGrid& g, double ds) {
  const int n = g.N() + 1;
  const auto c = coefs(g);
  const Eigen::MatrixXd& D = g.D1(Parity::none);
  Eigen::MatrixXd A(2 * n, 2 * n);
  A.topLeftCorner(n, n) = (c.hp.array() / c.w.array()).matrix().asDiagonal() * D;
  A.topRightCorner(n, n) = (c.dhp.array() / c.w.array()).matrix().asDiagonal();
  A.bottomLeftCorner(n, n) = (c.hm.array() / c.w.array()).matrix().asDiagonal() * D;
  A.bottomRightCorner(n, n) = (c.dhm.array() / c.w.array()).matrix().asDiagonal();
  Eigen::MatrixXd Ax(2 * n, 2 * n);
  const Eigen::MatrixXd& Q = g.antiderivative();
  Ax.topLeftCorner(n, n) = -0.5 * Q * c.dhm.asDiagonal();
  Ax.topRightCorner(n, n) = 0.5 * Q * c.dhp.asDiagonal();
  Ax.bottomLeftCorner(n, n) = 0.5 * Eigen::MatrixXd(c.hm.asDiagonal());
  Ax.bottomRightCorner(n, n) = -0.5 * Eigen::MatrixXd(c.hp.asDiagonal());
  Eigen::MatrixXd TA(2 * n, 2 * n);
  TA.topRows(n) = transport_matrix(g, ds, -1) * A.topRows(n);
  TA.bottomRows(n) = transport_matrix(g, ds, +1) * A.bottomRows(n);
  return std::exp(-ds) * Ax * TA;
}

StateVector evolve_S1(const RadialGrid& g, const StateVector& v, double ds) {
  auto w = halfwave_decompose(g, v);
  const double e = std::exp(-ds);
  auto moved = evolve_halfwave(g, w, ds);
  // Restore exact parity lost to interpolation roundoff.
  const Eigen::VectorXd vp = 0.5 * (moved.vp - moved.vm.reverse());
  moved.vp = vp;
  moved.vm = -vp.reverse();
  auto out = halfwave_recompose(g, moved);
  out.f1 *= e;
  out.f2 *= e;
  return out;
}

std::pair<double, double> dalembert_oracle(const DalembertData& data, double T, double s, double y) {
  const auto c = hsc_map(T, s, y);
  const double t = c.t, x = c.x;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double integral = GK::integrate(data.g, x - t, x + t, 15, 1e-14);
  const double u = 0.5 * (data.f(x + t) + data.f(x - t)) + 0.5 * integral;
  const double ut = 0.5 * (data.fp(x + t) - data.fp(x - t)) + 0.5 * (data.g(x + t) + data.g(x - t));
  const double ux = 0.5 * (data.fp(x + t) + data.fp(x - t)) + 0.5 * (data.g(x + t) - data.g(x - t));
  const double h = height_eval(y).h;
  return {u, -std::exp(-s) * (h * ut + y * ux)};
}

}  // namespace hsc
