#include "hsc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsc {

double blowup_a(int n) {
  return 2.0 * (1.0 + std::sqrt((n - 4.0) / (3.0 * (n - 2.0))));
}

double blowup_b(int n) {
  return (2.0 * (n - 4.0) + std::sqrt(3.0 * (n - 2.0) * (n - 4.0))) / 3.0;
}

double DimensionParams::ad() const {
  if (!a) throw std::logic_error("a_d is undefined for d = " + std::to_string(d));
  return *a;
}

double DimensionParams::bd() const {
  if (!b) throw std::logic_error("b_d is undefined for d = " + std::to_string(d));
  return *b;
}

DimensionParams make_params(int d) {
  if (d < 3) throw std::invalid_argument("dimension must be at least 3, got " + std::to_string(d));
  if (d % 2 == 0) throw std::invalid_argument("dimension must be odd, got " + std::to_string(d));
  DimensionParams p;
  p.d = d;
  p.n = d - 2;
  if (d >= 7) {
    p.a = blowup_a(p.n);
    p.b = blowup_b(p.n);
  }
  return p;
}

std::array<double, 4> HeightFunction::slope_ratio(double y) const {
  const auto hd = derivatives(y);
  if (std::abs(y) < 1e-3) {
    // h' = h''(0) y + h''''(0) y^3 / 6 + O(y^5)
    const auto h0 = derivatives(0.0);
    const double c4 = h0[4] / 6.0;
    return {h0[2] + c4 * y * y, 2.0 * c4 * y, 2.0 * c4, 2.0 * c4};
  }
  const double q = hd[1] / y;
  const double qp = (hd[2] - q) / y;
  const double qpp = (hd[3] - 2.0 * qp) / y;
  return {q, qp, qpp, qp / y};
}

std::array<double, 5> StandardHeight::derivatives(double y) const {
  const double s = std::sqrt(2.0 + y * y);
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  const double s7 = s5 * s * s;
  return {s - 2.0, y / s, 2.0 / s3, -6.0 * y / s5, (24.0 * y * y - 12.0) / s7};
}

std::array<double, 4> StandardHeight::slope_ratio(double y) const {
  const double s = std::sqrt(2.0 + y * y);
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  return {1.0 / s, -y / s3, -1.0 / s3 + 3.0 * y * y / s5, -1.0 / s3};
}

const HeightFunction& standard_height() {
  static const StandardHeight instance;
  return instance;
}

HeightValues height_eval(double y, const HeightFunction& hf) {
  const auto d = hf.derivatives(y);
  return {d[0], d[1], d[2]};
}

double h_plus(double y, const HeightFunction& hf) { return y + hf.derivatives(y)[0]; }
double h_minus(double y, const HeightFunction& hf) { return y - hf.derivatives(y)[0]; }

double g_T(double T, double t, double x) {
  const double tau = T - t;
  return 1.0 / (tau + 0.5 * std::sqrt(2.0 * (tau * tau + x * x)));
}

double h_transition(double xi) { return 1.0 + 0.5 * std::sqrt(2.0 * (1.0 + xi * xi)); }

CartesianPoint hsc_map(double T, double s, double y, const HeightFunction& hf) {
  const double e = std::exp(-s);
  return {T + e * hf.derivatives(y)[0], e * y};
}

HyperboloidalPoint hsc_inverse(double T, double t, double x) {
  if (!(std::abs(x) > t - T)) throw std::domain_error("point outside the hyperboloidal domain");
  const double g = g_T(T, t, x);
  return {std::log(g), g * x};
}

GeometryTables geometry_tables(double s, const Eigen::VectorXd& y, const HeightFunction& hf) {
  const int d = static_cast<int>(y.size());
  const int D = d + 1;
  const double r = y.norm();
  const auto hd = hf.derivatives(r);
  const auto qr = hf.slope_ratio(r);
  const double h = hd[0];
  const double e = std::exp(-s);
  const Eigen::VectorXd grad = qr[0] * y;
  Eigen::MatrixXd hess = qr[0] * Eigen::MatrixXd::Identity(d, d) + qr[3] * y * y.transpose();
  const double w = y.dot(grad) - h;

  GeometryTables g;
  g.jacobian = Eigen::MatrixXd::Zero(D, D);
  g.jacobian(0, 0) = -e * h;
  for (int i = 0; i < d; ++i) {
    g.jacobian(0, i + 1) = e * grad(i);
    g.jacobian(i + 1, 0) = -e * y(i);
    g.jacobian(i + 1, i + 1) = e;
  }
  g.inv_jacobian = Eigen::MatrixXd::Zero(D, D);
  const double es = std::exp(s);
  g.inv_jacobian(0, 0) = es / w;
  for (int i = 0; i < d; ++i) {
    g.inv_jacobian(0, i + 1) = -es * grad(i) / w;
    g.inv_jacobian(i + 1, 0) = es * y(i) / w;
    for (int j = 0; j < d; ++j)
      g.inv_jacobian(i + 1, j + 1) = es * ((i == j ? 1.0 : 0.0) - y(i) * grad(j) / w);
  }
  Eigen::MatrixXd minkowski = Eigen::MatrixXd::Identity(D, D);
  minkowski(0, 0) = -1.0;
  g.g_lower = g.jacobian.transpose() * minkowski * g.jacobian;
  g.g_upper = g.inv_jacobian * minkowski * g.inv_jacobian.transpose();

  // Second derivatives d_mu d_nu eta^kappa.
  std::vector<Eigen::MatrixXd> second(D, Eigen::MatrixXd::Zero(D, D));
  second[0](0, 0) = e * h;
  for (int i = 0; i < d; ++i) {
    second[0](0, i + 1) = second[0](i + 1, 0) = -e * grad(i);
    for (int j = 0; j < d; ++j) second[0](i + 1, j + 1) = e * hess(i, j);
    second[i + 1](0, 0) = e * y(i);
    second[i + 1](0, i + 1) = second[i + 1](i + 1, 0) = -e;
  }
  g.christoffel.assign(D, Eigen::MatrixXd::Zero(D, D));
  for (int l = 0; l < D; ++l)
    for (int k = 0; k < D; ++k) g.christoffel[l] += g.inv_jacobian(l, k) * second[k];
  g.sqrt_det_g = std::pow(e, d + 1) * w;
  return g;
}

double contracted_christoffel_residual(double s, const Eigen::VectorXd& y, double step,
                                       const HeightFunction& hf) {
  const int d = static_cast<int>(y.size());
  const int D = d + 1;
  static constexpr std::array<double, 7> stencil{-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0};
  auto density = [&](double ss, const Eigen::VectorXd& yy) {
    const auto t = geometry_tables(ss, yy, hf);
    return Eigen::MatrixXd(t.g_upper * t.sqrt_det_g);
  };
  Eigen::VectorXd div = Eigen::VectorXd::Zero(D);
  for (int mu = 0; mu < D; ++mu) {
    for (int k = 0; k < 7; ++k) {
      if (stencil[k] == 0.0) continue;
      const double off = (k - 3) * step;
      double ss = s;
      Eigen::VectorXd yy = y;
      if (mu == 0)
        ss += off;
      else
        yy(mu - 1) += off;
      div += stencil[k] / (60.0 * step) * density(ss, yy).row(mu).transpose();
    }
  }
  const auto t = geometry_tables(s, y, hf);
  double worst = 0.0;
  for (int nu = 0; nu < D; ++nu) {
    const double contracted = (t.g_upper.cwiseProduct(t.christoffel[nu])).sum();
    worst = std::max(worst, std::abs(div(nu) / t.sqrt_det_g + contracted));
  }
  return worst;
}

double metric_g00(double s, double y, const HeightFunction& hf) {
  const auto hd = hf.derivatives(y);
  const double w = y * hd[1] - hd[0];
  return -std::exp(2.0 * s) * (1.0 - hd[1] * hd[1]) / (w * w);
}

HeightLift<double> lift_height(double eta, const HeightFunction& hf) {
  const auto hd = hf.derivatives(eta);
  return {hd[0], hd[1], hd[2], hf.slope_ratio(eta)[0]};
}

namespace {
// F(eta) for a Jet eta, given F, F', F'' at eta.v.
Jet compose(const Jet& eta, double f, double fp, double fpp) {
  return {f, fp * eta.d1, fpp * eta.d1 * eta.d1 + fp * eta.d2};
}
}  // namespace

HeightLift<Jet> lift_height(const Jet& eta, const HeightFunction& hf) {
  const auto hd = hf.derivatives(eta.v);
  const auto qr = hf.slope_ratio(eta.v);
  return {compose(eta, hd[0], hd[1], hd[2]), compose(eta, hd[1], hd[2], hd[3]),
          compose(eta, hd[2], hd[3], hd[4]), compose(eta, qr[0], qr[1], qr[2])};
}

WaveCoefficients wave_coeffs(int d, double eta, const HeightFunction& hf) {
  const auto c = coefficient_set(d, eta, lift_height(eta, hf));
  WaveCoefficients w{};
  w.eta_c11 = c.eta_c11;
  w.c11 = eta != 0.0 ? c.eta_c11 / eta : 0.0;
  w.c12 = c.c12;
  w.c20 = c.c20;
  w.c21 = c.c21;
  w.c1 = c.c1;
  w.c2 = c.c2;
  w.c2_over_eta = c.c2_over_eta;
  w.eta_c3 = c.eta_c3;
  w.c3 = eta != 0.0 ? c.eta_c3 / eta : 0.0;
  w.c4 = c.c4;
  return w;
}

double IdentityResiduals::max() const {
  double m = 0.0;
  for (double r : descent) m = std::max(m, r);
  for (double r : one_dim) m = std::max(m, r);
  return m;
}

IdentityResiduals coefficient_identity_residuals(int d, double eta, const HeightFunction& hf) {
  if (eta == 0.0) throw std::domain_error("identity residuals require eta != 0");
  const Jet x = Jet::variable(eta);
  const auto hl = lift_height(x, hf);
  const auto c = coefficient_set(d, x, hl);
  const Jet c11 = c.eta_c11 / x;
  const Jet c3 = c.eta_c3 / x;
  const Jet c11_lower = c11 + c3;
  const double shared = c.c21.v * c.c2.d1 + c.c2.v * c.c4.v;

  IdentityResiduals r;
  r.descent[0] = std::abs(c.c1.v * c11.d1 - ((d - 2) * c3.v + c.c1.d2 * c.c12.v +
                                             c.c1.d1 * c11_lower.v + shared * c11.v));
  r.descent[1] = std::abs(c.c1.v * c.c20.d1 - ((d - 2) * c.c4.v + c.c2.d2 * c.c12.v +
                                               c.c2.d1 * c11_lower.v + shared * c.c20.v));
  r.descent[2] = std::abs(c.c1.v * c.c12.d1 -
                          (2.0 * c.c1.d1 * c.c12.v + c.c1.v * c3.v + shared * c.c12.v));
  r.descent[3] = std::abs(c.c1.v * c.c21.d1 - (c.c1.v * c.c4.v + c.c2.v * c3.v +
                                               2.0 * c.c2.d1 * c.c12.v + c.c1.d1 * c.c21.v +
                                               shared * c.c21.v));

  const auto one = coefficient_set(1, eta, lift_height(eta, hf));
  const double c11_one = one.eta_c11 / eta;
  r.one_dim[0] = std::abs(c11_one - one.c21 - eta * one.c20 - eta);
  r.one_dim[1] = std::abs(one.eta_c3 - (eta * one.c21 - 2.0 * one.c12));
  r.one_dim[2] = std::abs(eta * one.c4 - (-one.c21 - 2.0 * eta));
  return r;
}

double blowup_profile(const DimensionParams& p, double T, double t, double x) {
  const double den = p.bd() * (T - t) * (T - t) + x * x;
  if (den == 0.0) throw std::domain_error("blowup profile is singular at (T, 0)");
  return -p.ad() / den;
}

HscValue blowup_profile_hsc(const DimensionParams& p, double s, double y, const HeightFunction& hf) {
  const double h = hf.derivatives(y)[0];
  const double v = -std::exp(2.0 * s) * p.ad() / (p.bd() * h * h + y * y);
  return {v, 2.0 * v};
}

double blowup_time_derivative_hsc(const DimensionParams& p, double s, double y,
                                  const HeightFunction& hf) {
  const double h = hf.derivatives(y)[0];
  const double den = p.bd() * h * h + y * y;
  return -2.0 * p.ad() * p.bd() * std::exp(3.0 * s) * h / (den * den);
}

namespace {
double radial_weight(double y, const HeightFunction& hf) {
  const auto hd = hf.derivatives(y);
  const double w = y * hd[1] - hd[0];
  return w * w / (1.0 - hd[1] * hd[1]);
}
}  // namespace

double potential(const DimensionParams& p, double y, const HeightFunction& hf) {
  const double a = p.ad(), b = p.bd();
  const double h = hf.derivatives(y)[0];
  const double den = b * h * h + y * y;
  return -3.0 * a * (p.d - 4) * radial_weight(y, hf) * ((a - 2.0) * y * y - 2.0 * b * h * h) /
         (den * den);
}

double potential_ssc(const DimensionParams& p, double rho) {
  const double a = p.ad(), b = p.bd();
  const double den = b + rho * rho;
  return -3.0 * (p.d - 4) * a * ((a - 2.0) * rho * rho - 2.0 * b) / (den * den);
}

double nonlinearity_scalar(const DimensionParams& p, double y, double alpha,
                           const HeightFunction& hf) {
  const double a = p.ad(), b = p.bd();
  const double h = hf.derivatives(y)[0];
  const double den = b * h * h + y * y;
  const double quad = 3.0 * ((1.0 - a) * y * y + b * h * h) / den;
  return -(p.d - 4) * radial_weight(y, hf) * (quad * alpha * alpha + y * y * alpha * alpha * alpha);
}

std::array<double, 2> symmetry_mode(const DimensionParams& p, double y, const HeightFunction& hf) {
  const double h = hf.derivatives(y)[0];
  const double den = p.bd() * h * h + y * y;
  const double f = h / (den * den);
  return {f, 3.0 * f};
}

}  // namespace hsc
