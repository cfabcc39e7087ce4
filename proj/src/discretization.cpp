#include "hsc/discretization.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "hsc/model.hpp"

namespace hsc {

namespace {
constexpr double pi = std::numbers::pi;

// Barycentric differentiation matrices for arbitrary nodes and weights.
void diff_matrices(const Eigen::VectorXd& x, const Eigen::VectorXd& w, Eigen::MatrixXd& D1,
                   Eigen::MatrixXd& D2) {
  const int n = static_cast<int>(x.size());
  D1 = Eigen::MatrixXd::Zero(n, n);
  D2 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (i != j) D1(i, j) = (w(j) / w(i)) / (x(i) - x(j));
    D1(i, i) = -D1.row(i).sum();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (i != j) D2(i, j) = 2.0 * D1(i, j) * (D1(i, i) - 1.0 / (x(i) - x(j)));
    D2(i, i) = -D2.row(i).sum();
  }
}
}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> clenshaw_curtis(int n, double a, double b) {
  Eigen::VectorXd x(n + 1), w = Eigen::VectorXd::Zero(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double theta = pi * (n - k) / n;
    x(k) = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
  }
  // Weights from the cosine series of the constant function.
  for (int k = 0; k <= n; ++k) {
    const double theta = pi * k / n;
    double v = 1.0;
    if (n % 2 == 0) {
      if (k == 0 || k == n) {
        w(k) = 1.0 / (n * n - 1.0);
        continue;
      }
      for (int j = 1; j < n / 2; ++j) v -= 2.0 * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
      v -= std::cos(n * theta) / (n * n - 1.0);
    } else {
      if (k == 0 || k == n) {
        w(k) = 1.0 / (double(n) * n);
        continue;
      }
      for (int j = 1; j <= (n - 1) / 2; ++j)
        v -= 2.0 * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
    }
    w(k) = 2.0 * v / n;
  }
  w *= 0.5 * (b - a);
  // Nodes were generated in reverse angle order; weights are symmetric.
  return {x, w};
}

RadialGrid::RadialGrid(double R, int N, Parity parity) : R_(R), N_(N), parity_(parity) {
  if (!(R >= 0.5)) throw std::invalid_argument("grid radius must satisfy R >= 1/2");
  if (N < 8) throw std::invalid_argument("grid needs at least 8 intervals");
  if (N % 2) throw std::invalid_argument("grid interval count must be even");
  auto [x, w] = clenshaw_curtis(N, -R, R);
  x(N / 2) = 0.0;
  for (int k = 0; k < N / 2; ++k) x(N - k) = -x(k);  // exact symmetry
  x_ = x;
  w_ = w;
  bary_.resize(N + 1);
  for (int k = 0; k <= N; ++k) bary_(k) = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == N) ? 0.5 : 1.0);
  diff_matrices(x_, bary_, Df1_, Df2_);

  // Spectral antiderivative from 0 via the Chebyshev series.
  const int n = N;
  Eigen::MatrixXd C(n + 1, n + 1);  // values -> coefficients, f = sum a_j T_j(xi)
  for (int j = 0; j <= n; ++j)
    for (int k = 0; k <= n; ++k) {
      const double theta = pi * (n - k) / n;
      const double ck = (k == 0 || k == n) ? 0.5 : 1.0;
      const double cj = (j == 0 || j == n) ? 0.5 : 1.0;
      C(j, k) = 2.0 / n * cj * ck * std::cos(j * theta);
    }
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n + 2, n + 1);  // coefficients -> integral coefficients
  I(1, 0) += 1.0;
  if (n >= 1) I(2, 1) += 0.25;
  for (int j = 2; j <= n; ++j) {
    I(j + 1, j) += 1.0 / (2.0 * (j + 1));
    I(j - 1, j) -= 1.0 / (2.0 * (j - 1));
  }
  Eigen::MatrixXd E(n + 1, n + 2);  // integral coefficients -> values minus value at 0
  for (int k = 0; k <= n; ++k) {
    const double theta = pi * (n - k) / n;
    for (int j = 0; j <= n + 1; ++j) E(k, j) = std::cos(j * theta) - std::cos(j * pi / 2.0);
  }
  A_ = R * E * I * C;

  const int M = N / 2 + 1;
  eta_ = x_.tail(M);
  w_half_ = w_.tail(M);
  w_half_(0) *= 0.5;
  D1e_ = fold_operator(Df1_, Parity::even);
  D1o_ = fold_operator(Df1_, Parity::odd);
  D2e_ = fold_operator(Df2_, Parity::even);
  D2o_ = fold_operator(Df2_, Parity::odd);
}

const Eigen::MatrixXd& RadialGrid::D1(Parity p) const {
  return p == Parity::even ? D1e_ : (p == Parity::odd ? D1o_ : Df1_);
}

const Eigen::MatrixXd& RadialGrid::D2(Parity p) const {
  return p == Parity::even ? D2e_ : (p == Parity::odd ? D2o_ : Df2_);
}

Eigen::VectorXd RadialGrid::unfold(const Eigen::VectorXd& half, Parity p) const {
  const int c = N_ / 2;
  Eigen::VectorXd full(N_ + 1);
  const double sgn = p == Parity::odd ? -1.0 : 1.0;
  for (int i = 0; i <= c; ++i) {
    full(c + i) = half(i);
    full(c - i) = sgn * half(i);
  }
  if (p == Parity::odd) full(c) = 0.0;
  return full;
}

Eigen::VectorXd RadialGrid::fold(const Eigen::VectorXd& full) const { return full.tail(N_ / 2 + 1); }

Eigen::MatrixXd RadialGrid::fold_operator(const Eigen::MatrixXd& full, Parity p) const {
  const int c = N_ / 2, M = c + 1;
  const double sgn = p == Parity::odd ? -1.0 : 1.0;
  Eigen::MatrixXd out(M, M);
  for (int i = 0; i < M; ++i) {
    out(i, 0) = full(c + i, c);
    for (int j = 1; j < M; ++j) out(i, j) = full(c + i, c + j) + sgn * full(c + i, c - j);
  }
  if (p == Parity::odd) out.col(0).setZero();
  return out;
}

double RadialGrid::interpolate(const Eigen::VectorXd& full, double x) const {
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= N_; ++k) {
    const double dx = x - x_(k);
    if (dx == 0.0) return full(k);
    const double t = bary_(k) / dx;
    num += t * full(k);
    den += t;
  }
  return num / den;
}

Eigen::MatrixXd RadialGrid::interpolation_matrix(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(points.size(), N_ + 1);
  for (int i = 0; i < points.size(); ++i) {
    double den = 0.0;
    int hit = -1;
    for (int k = 0; k <= N_; ++k) {
      const double dx = points(i) - x_(k);
      if (dx == 0.0) {
        hit = k;
        break;
      }
      P(i, k) = bary_(k) / dx;
      den += P(i, k);
    }
    if (hit >= 0) {
      P.row(i).setZero();
      P(i, hit) = 1.0;
    } else {
      P.row(i) /= den;
    }
  }
  return P;
}

Eigen::MatrixXd RadialGrid::half_interpolation_matrix(const Eigen::VectorXd& points,
                                                      Parity p) const {
  const int c = N_ / 2, M = c + 1;
  const double sgn = p == Parity::odd ? -1.0 : 1.0;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N_ + 1, M);
  for (int i = 0; i < M; ++i) {
    U(c + i, i) = 1.0;
    if (i > 0) U(c - i, i) = sgn;
  }
  if (p == Parity::odd) U(c, 0) = 0.0;
  return interpolation_matrix(points) * U;
}

double RadialGrid::parity_defect(const Eigen::VectorXd& full, Parity p) const {
  if (p == Parity::none) return 0.0;
  const double sgn = p == Parity::odd ? -1.0 : 1.0;
  double worst = 0.0;
  for (int k = 0; k <= N_; ++k) worst = std::max(worst, std::abs(full(N_ - k) - sgn * full(k)));
  return worst;
}

Eigen::VectorXd StateVector::stacked() const {
  Eigen::VectorXd v(f1.size() + f2.size());
  v << f1, f2;
  return v;
}

StateVector StateVector::from_stacked(const Eigen::VectorXd& v, Parity p) {
  const auto n = v.size() / 2;
  return {v.head(n), v.tail(n), p};
}

double weighted_sobolev_norm(const RadialGrid& g, const Eigen::VectorXd& f, int k, int d,
                             Parity p) {
  if (k < 0 || k > g.N() / 4) throw std::invalid_argument("Sobolev order too large for grid resolution");
  const int m = (d - 1) / 2;
  Eigen::VectorXd F = f.cwiseProduct(g.eta().array().pow(m).matrix());
  Parity pf = (m % 2 == 0) ? p : flip(p);
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    total += std::sqrt(2.0 * g.half_weights().dot(F.cwiseAbs2()));
    if (j < k) {
      F = g.D1(pf) * F;
      pf = flip(pf);
    }
  }
  return total;
}

double state_norm(const RadialGrid& g, const StateVector& v, int k, int d) {
  return weighted_sobolev_norm(g, v.f1, k, d, v.parity) +
         weighted_sobolev_norm(g, v.f2, std::max(k - 1, 0), d, v.parity);
}

double full_sobolev_norm(const RadialGrid& g, const Eigen::VectorXd& f, int k) {
  if (k < 0 || k > g.N() / 4) throw std::invalid_argument("Sobolev order too large for grid resolution");
  Eigen::VectorXd F = f;
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    total += std::sqrt(std::max(0.0, g.full_weights().dot(F.cwiseAbs2())));
    if (j < k) F = g.D1(Parity::none) * F;
  }
  return total;
}

double hpm_inner(const RadialGrid& g, const Eigen::VectorXd& f, const Eigen::VectorXd& h,
                 int sign) {
  double acc = 0.0;
  for (int k = 0; k <= g.N(); ++k) {
    const double hp = height_eval(g.x()(k)).hp;
    acc += g.full_weights()(k) * f(k) * h(k) * (1.0 + sign * hp);
  }
  return acc;
}

namespace {
double smooth_step(double t) {  // 0 for t <= 0, 1 for t >= 1, C-infinity
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
}  // namespace

Eigen::VectorXd extension_operator(const RadialGrid& g, const Eigen::VectorXd& f, int k,
                                   const Eigen::VectorXd& points) {
  return extension_operator([&](double x) { return g.interpolate(f, x); }, g.R(), k, points);
}

Eigen::VectorXd extension_operator(const std::function<double(double)>& f, double R, int k,
                                   const Eigen::VectorXd& points) {
  const int n = k + 1;
  Eigen::VectorXd b(n);
  for (int j = 0; j < n; ++j) b(j) = (j + 1) / (2.0 * n);
  // sum_j a_j (-b_j)^i = 1 for i = 0..k matches derivatives up to order k.
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = std::pow(-b(j), i);
  const Eigen::VectorXd a = V.partialPivLu().solve(Eigen::VectorXd::Ones(n));
  Eigen::VectorXd out(points.size());
  for (int i = 0; i < points.size(); ++i) {
    const double x = points(i);
    if (std::abs(x) <= R) {
      out(i) = f(x);
      continue;
    }
    const double u = std::abs(x) - R;
    const double side = x > 0 ? 1.0 : -1.0;
    const double chi = 1.0 - smooth_step((u - 0.25 * R) / (0.5 * R));
    double acc = 0.0;
    if (chi > 0.0)
      for (int j = 0; j < n; ++j) acc += a(j) * f(side * (R - b(j) * u));
    out(i) = chi * acc;
  }
  return out;
}

std::pair<double, double> hardy_check(const RadialGrid& g, const Eigen::VectorXd& f, double s) {
  if (!(s < -0.5)) throw std::invalid_argument("Hardy inequality on balls needs s < -1/2");
  const Eigen::VectorXd df = g.D1(Parity::none) * f;
  using Q = boost::math::quadrature::gauss<double, 60>;
  auto side = [&](double a, double b) {
    const double lhs = Q::integrate(
        [&](double x) {
          const double v = g.interpolate(f, x);
          return std::pow(std::abs(x), 2.0 * s) * v * v;
        },
        a, b);
    const double rhs = Q::integrate(
        [&](double x) {
          const double v = g.interpolate(df, x);
          return std::pow(std::abs(x), 2.0 * s + 2.0) * v * v;
        },
        a, b);
    return std::pair{lhs, rhs};
  };
  const auto [l1, r1] = side(-g.R(), 0.0);
  const auto [l2, r2] = side(0.0, g.R());
  return {std::sqrt(l1 + l2), std::sqrt(r1 + r2)};
}

Eigen::VectorXd integral_op_T(const RadialGrid& g, const Eigen::VectorXd& f, int m, int n,
                              const std::function<double(double)>& phi) {
  if (n + 1 - m < 0) throw std::invalid_argument("integral operator needs n + 1 - m >= 0");
  using Q = boost::math::quadrature::gauss<double, 60>;
  Eigen::VectorXd out(f.size());
  for (int k = 0; k < f.size(); ++k) {
    const double x = g.x()(k);
    const double I = Q::integrate(
        [&](double t) { return std::pow(t, n) * phi(t * x) * g.interpolate(f, t * x); }, 0.0, 1.0);
    out(k) = std::pow(x, n + 1 - m) * I;
  }
  return out;
}

}  // namespace hsc
