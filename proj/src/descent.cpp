#include "hsc/descent.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/interpolators/barycentric_rational.hpp>

#include "collocation.hpp"
#include "hsc/halfwave.hpp"
#include "hsc/model.hpp"

namespace hsc {

namespace {
using detail::Collocation;
using detail::MatT;
using detail::VecT;
using QMat = MatT<Quad>;
using QVec = VecT<Quad>;

void check_dimension(int d) {
  if (d < 3 || d % 2 == 0) throw std::invalid_argument("descent needs odd d >= 3");
}

template <class S>
MatT<S> block2(const MatT<S>& a, const MatT<S>& b, const MatT<S>& c, const MatT<S>& d) {
  MatT<S> out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

template <class S>
MatT<S> diag(const VecT<S>& v) {
  return MatT<S>(v.asDiagonal());
}

// Integral kernels of the inverse step; (eta - h h')/eta is written as 1 - h q.
template <class S>
struct Kernels {
  S t11, t12, t21, t22;
};

template <class S>
Kernels<S> kernels(int d, const S& eta) {
  const auto l = detail::standard_lift(eta);
  const S w = eta * l.hp - l.h;
  const S om = S(1) - l.hp * l.hp;
  const S a = S(d - 3) * (S(1) - l.h * l.q) / w;
  const S b = (eta * eta - l.h * l.h) / (w * w) * l.hpp;
  Kernels<S> k;
  k.t11 = om / w + a - b;
  k.t12 = S(2) * (eta - l.h * l.hp) / w * l.hp + a * l.h - b * l.h;
  k.t21 = -om / w;
  k.t22 = l.h * k.t21;
  return k;
}

template <class S>
MatT<S> generator(const Collocation<S>& C, int d) {
  const int M = C.M;
  VecT<S> c11(M), c12(M), c20(M), c21(M);
  for (int i = 0; i < M; ++i) {
    const auto c = coefficient_set(d, C.eta(i), detail::standard_lift(C.eta(i)));
    c11(i) = i == 0 ? S(0) : c.eta_c11 / C.eta(i);
    c12(i) = c.c12;
    c20(i) = c.c20;
    c21(i) = c.c21;
  }
  MatT<S> first = c11.asDiagonal() * C.D1e;
  // c11 f1' -> (eta c11)(0) f1''(0) at the centre.
  first.row(0) = coefficient_set(d, S(0), detail::standard_lift(S(0))).eta_c11 * C.D2e.row(0);
  return block2<S>(MatT<S>::Zero(M, M), MatT<S>::Identity(M, M), first + c12.asDiagonal() * C.D2e,
                   diag<S>(c20) + c21.asDiagonal() * C.D1e);
}

template <class S>
MatT<S> generator_1d(const Collocation<S>& C) {
  const int n = C.N + 1;
  VecT<S> c11(n), c12(n), c20(n), c21(n);
  for (int i = 0; i < n; ++i) {
    const auto c = coefficient_set(1, C.x(i), detail::standard_lift(C.x(i)));
    // Regular for d = 1 and vanishing at 0.
    c11(i) = C.x(i) == S(0) ? S(0) : c.eta_c11 / C.x(i);
    c12(i) = c.c12;
    c20(i) = c.c20;
    c21(i) = c.c21;
  }
  return block2<S>(MatT<S>::Zero(n, n), MatT<S>::Identity(n, n),
                   c11.asDiagonal() * C.D1 + c12.asDiagonal() * C.D2,
                   diag<S>(c20) + c21.asDiagonal() * C.D1);
}

template <class S>
MatT<S> step(const Collocation<S>& C, int d) {
  const int M = C.M;
  if (d == 3) {
    const MatT<S> XU = C.x.asDiagonal() * C.U;
    return block2<S>(XU, MatT<S>::Zero(XU.rows(), M), -XU, XU);
  }
  VecT<S> c1(M), c2(M), c2c11(M), c2c12(M), c2c20(M), c1c2c21(M);
  for (int i = 0; i < M; ++i) {
    const auto c = coefficient_set(d, C.eta(i), detail::standard_lift(C.eta(i)));
    c1(i) = c.c1;
    c2(i) = c.c2;
    c2c11(i) = c.c2_over_eta * c.eta_c11;
    c2c12(i) = c.c2 * c.c12;
    c2c20(i) = c.c2 * c.c20 + S(d - 2);
    c1c2c21(i) = c.c1 + c.c2 * c.c21;
  }
  const MatT<S> I = MatT<S>::Identity(M, M);
  return block2<S>(S(d - 2) * I + c1.asDiagonal() * C.D1e, diag<S>(c2),
                   c2c11.asDiagonal() * C.D1e + c2c12.asDiagonal() * C.D2e,
                   diag<S>(c2c20) + c1c2c21.asDiagonal() * C.D1e);
}

template <class S>
std::array<MatT<S>, 4> inverse_blocks(const Collocation<S>& C, int d) {
  const int M = C.M;
  // int_0^eta t(e) e^{d-3} g(e) de = eta^{d-2} int_0^1 t(tau eta) tau^{d-3} g(tau eta) dtau;
  // the eta^{d-2} cancels the singular prefactors phi.
  const auto [tau, w] = detail::cc_unit<S>(C.N + 2 * d + 16);
  const int nt = static_cast<int>(tau.size());
  VecT<S> pts(M * nt);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < nt; ++j) pts(i * nt + j) = tau(j) * C.eta(i);
  const MatT<S> P = C.interpolation(pts) * C.U;
  MatT<S> I11 = MatT<S>::Zero(M, M), I12 = I11, I21 = I11, I22 = I11;
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < nt; ++j) {
      S base = w(j);
      for (int p = 0; p < d - 3; ++p) base *= tau(j);
      const auto k = kernels(d, pts(i * nt + j));
      const auto row = P.row(i * nt + j);
      I11.row(i) += (base * k.t11) * row;
      I12.row(i) += (base * k.t12) * row;
      I21.row(i) += (base * k.t21) * row;
      I22.row(i) += (base * k.t22) * row;
    }
  }
  VecT<S> h(M), extra(M);
  for (int i = 0; i < M; ++i) {
    const auto l = detail::standard_lift(C.eta(i));
    h(i) = l.h;
    extra(i) = (l.h * l.h - C.eta(i) * C.eta(i)) / (C.eta(i) * l.hp - l.h) * l.q;
  }
  const MatT<S> T11 = I12 - h.asDiagonal() * I11;
  const MatT<S> T12 = I22 - h.asDiagonal() * I21;
  const MatT<S> T21 = S(d - 2) * I12 - S(d - 3) * (h.asDiagonal() * I11) + diag<S>(extra);
  const MatT<S> T22 = S(d - 2) * I22 - S(d - 3) * (h.asDiagonal() * I21);
  return {T11, T12, T21, T22};
}

template <class S>
MatT<S> step_inverse(const Collocation<S>& C, int d) {
  if (d > 3) {
    const auto B = inverse_blocks(C, d);
    return block2<S>(B[0], B[1], B[2], B[3]);
  }
  // f1 = g1 / eta, f2 = (g1 + g2) / eta, with the derivative at eta = 0.
  const int n = C.N + 1;
  MatT<S> Sm = MatT<S>::Zero(C.M, n);
  for (int i = 1; i < C.M; ++i) Sm(i, C.c + i) = S(1) / C.eta(i);
  Sm.row(0) = C.D1.row(C.c);
  return block2<S>(Sm, MatT<S>::Zero(C.M, n), Sm, Sm);
}

template <class S>
MatT<S> full(const Collocation<S>& C, int d) {
  MatT<S> D = step(C, d);
  for (int k = d - 2; k >= 3; k -= 2) D = step(C, k) * D;
  return D;
}

template <class S>
MatT<S> full_inverse(const Collocation<S>& C, int d) {
  MatT<S> D = step_inverse(C, 3);
  for (int k = 5; k <= d; k += 2) D = step_inverse(C, k) * D;
  return D;
}

// Half-wave map A and its inverse on stacked odd states.
template <class S>
std::pair<MatT<S>, MatT<S>> halfwave_maps(const Collocation<S>& C) {
  const int n = C.N + 1;
  VecT<S> hp(n), hm(n), dhp(n), dhm(n), w(n);
  for (int k = 0; k < n; ++k) {
    const auto l = detail::standard_lift(C.x(k));
    hp(k) = C.x(k) + l.h;
    hm(k) = C.x(k) - l.h;
    dhp(k) = S(1) + l.hp;
    dhm(k) = S(1) - l.hp;
    w(k) = C.x(k) * l.hp - l.h;
  }
  MatT<S> A(2 * n, 2 * n), Ax(2 * n, 2 * n);
  A << (hp.array() / w.array()).matrix().asDiagonal() * C.D1,
      diag<S>((dhp.array() / w.array()).matrix()),
      (hm.array() / w.array()).matrix().asDiagonal() * C.D1,
      diag<S>((dhm.array() / w.array()).matrix());
  const MatT<S> Q = C.antiderivative();
  Ax << S(-0.5) * Q * dhm.asDiagonal(), S(0.5) * Q * dhp.asDiagonal(), S(0.5) * diag<S>(hm),
      S(-0.5) * diag<S>(hp);
  return {A, Ax};
}

Collocation<Quad> quad_grid(const RadialGrid& g) { return Collocation<Quad>(g.R(), g.N()); }

// Odd pair on the full grid: H^k x H^{k-1}.
double odd_pair_norm(const RadialGrid& g, const StateVector& v, int k) {
  return full_sobolev_norm(g, v.f1, k) + full_sobolev_norm(g, v.f2, std::max(k - 1, 0));
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_even_input(const RadialGrid& g, const StateVector& v) {
  require(v.parity == Parity::even, "expected an even radial state");
  require(v.f1.size() == g.half_size() && v.f2.size() == g.half_size(),
          "radial state must live on the half grid");
}

void check_odd_input(const RadialGrid& g, const StateVector& v) {
  require(v.parity == Parity::odd, "expected an odd one-dimensional state");
  require(v.f1.size() == g.N() + 1 && v.f2.size() == g.N() + 1,
          "one-dimensional state must live on the full grid");
  const double scale = std::max({1.0, v.f1.cwiseAbs().maxCoeff(), v.f2.cwiseAbs().maxCoeff()});
  require(g.parity_defect(v.f1, Parity::odd) <= 1e-10 * scale &&
              g.parity_defect(v.f2, Parity::odd) <= 1e-10 * scale,
          "one-dimensional state is not odd");
}

StateVector apply(const QMat& m, const StateVector& v, Parity out) {
  const QVec r = m * detail::cast_vec<Quad>(v.stacked());
  return StateVector::from_stacked(detail::to_double(r), out);
}
}  // namespace

double DescentKernelData::phi11(double eta) const {
  return height_eval(eta).h / std::pow(eta, d - 2);
}
double DescentKernelData::phi12(double eta) const { return 1.0 / std::pow(eta, d - 2); }
double DescentKernelData::phi21(double eta) const {
  return (d - 3) * height_eval(eta).h / std::pow(eta, d - 2);
}
double DescentKernelData::phi22(double eta) const { return (d - 2) / std::pow(eta, d - 2); }
double DescentKernelData::wronskian(double eta) const {
  return -height_eval(eta).hp / std::pow(eta, 2 * (d - 2));
}

// (eta - h h')/eta is written as 1 - h q to stay regular at 0.
double DescentKernelData::t11(double eta) const {
  const auto v = height_eval(eta);
  const double q = standard_height().slope_ratio(eta)[0];
  const double w = eta * v.hp - v.h;
  return (1.0 - v.hp * v.hp) / w + (d - 3) * (1.0 - v.h * q) / w -
         (eta * eta - v.h * v.h) / (w * w) * v.hpp;
}
double DescentKernelData::t12(double eta) const {
  const auto v = height_eval(eta);
  const double q = standard_height().slope_ratio(eta)[0];
  const double w = eta * v.hp - v.h;
  return 2.0 * (eta - v.h * v.hp) / w * v.hp + (d - 3) * (1.0 - v.h * q) / w * v.h -
         (eta * eta - v.h * v.h) / (w * w) * v.h * v.hpp;
}
double DescentKernelData::t21(double eta) const {
  const auto v = height_eval(eta);
  return -(1.0 - v.hp * v.hp) / (eta * v.hp - v.h);
}
double DescentKernelData::t22(double eta) const { return height_eval(eta).h * t21(eta); }

Eigen::MatrixXd free_generator_matrix(const RadialGrid& g, int d) {
  check_dimension(d);
  return detail::to_double(generator(quad_grid(g), d));
}

Eigen::MatrixXd one_dim_generator_matrix(const RadialGrid& g) {
  return detail::to_double(generator_1d(quad_grid(g)));
}

Eigen::MatrixXd descent_step_matrix(const RadialGrid& g, int d) {
  check_dimension(d);
  return detail::to_double(step(quad_grid(g), d));
}

InverseBlocks descent_inverse_blocks(const RadialGrid& g, int d) {
  check_dimension(d);
  if (d < 5) throw std::invalid_argument("kernel form of the inverse needs d >= 5");
  const auto B = inverse_blocks(quad_grid(g), d);
  return {detail::to_double(B[0]), detail::to_double(B[1]), detail::to_double(B[2]),
          detail::to_double(B[3])};
}

Eigen::MatrixXd descent_step_inverse_matrix(const RadialGrid& g, int d) {
  check_dimension(d);
  return detail::to_double(step_inverse(quad_grid(g), d));
}

Eigen::MatrixXd descent_full_matrix(const RadialGrid& g, int d) {
  check_dimension(d);
  return detail::to_double(full(quad_grid(g), d));
}

Eigen::MatrixXd descent_full_inverse_matrix(const RadialGrid& g, int d) {
  check_dimension(d);
  return detail::to_double(full_inverse(quad_grid(g), d));
}

QuadMatrix descent_full_matrix_quad(const RadialGrid& g, int d) {
  check_dimension(d);
  return full(quad_grid(g), d);
}

QuadMatrix descent_full_inverse_matrix_quad(const RadialGrid& g, int d) {
  check_dimension(d);
  return full_inverse(quad_grid(g), d);
}

QuadVector quad_half_nodes(const RadialGrid& g) { return quad_grid(g).eta; }

StateVector descent_step(const RadialGrid& g, int d, const StateVector& v) {
  check_dimension(d);
  check_even_input(g, v);
  return apply(step(quad_grid(g), d), v, d == 3 ? Parity::odd : Parity::even);
}

StateVector descent_step_inverse(const RadialGrid& g, int d, const StateVector& w) {
  check_dimension(d);
  if (d == 3)
    check_odd_input(g, w);
  else
    check_even_input(g, w);
  return apply(step_inverse(quad_grid(g), d), w, Parity::even);
}

StateVector descent_full(const RadialGrid& g, int d, const StateVector& v) {
  check_dimension(d);
  check_even_input(g, v);
  return apply(full(quad_grid(g), d), v, Parity::odd);
}

StateVector descent_full_inverse(const RadialGrid& g, int d, const StateVector& w) {
  check_dimension(d);
  check_odd_input(g, w);
  return apply(full_inverse(quad_grid(g), d), w, Parity::even);
}

namespace {
struct Sampled {
  QVec x;
  StateVector v;
};
Sampled sample_pair(const Collocation<Quad>& C, const QuadFunction& f1, const QuadFunction& f2) {
  QVec x(2 * C.M);
  for (int i = 0; i < C.M; ++i) {
    x(i) = f1(C.eta(i));
    x(C.M + i) = f2(C.eta(i));
  }
  return {x, StateVector::from_stacked(detail::to_double(x), Parity::even)};
}
}  // namespace

double intertwining_residual(const RadialGrid& g, int d, const QuadFunction& f1,
                             const QuadFunction& f2, int k) {
  check_dimension(d);
  const auto C = quad_grid(g);
  const auto [x, v] = sample_pair(C, f1, f2);
  const QMat D = full(C, d);
  const QVec Dx = D * x;
  const QVec r = D * (generator(C, d) * x) - Dx - generator_1d(C) * Dx;
  return odd_pair_norm(g, StateVector::from_stacked(detail::to_double(r), Parity::odd), k) /
         state_norm(g, v, k, d);
}

double step_intertwining_residual(const RadialGrid& g, int d, const QuadFunction& f1,
                                  const QuadFunction& f2, int k) {
  check_dimension(d);
  if (d < 5) throw std::invalid_argument("single-step identity needs d >= 5");
  const auto C = quad_grid(g);
  const auto [x, v] = sample_pair(C, f1, f2);
  const QMat D = step(C, d);
  const QVec r = D * (generator(C, d) * x) - generator(C, d - 2) * (D * x);
  return state_norm(g, StateVector::from_stacked(detail::to_double(r), Parity::even), k, d - 2) /
         state_norm(g, v, k, d);
}

// S_d(ds) = D^{-1} Ax T(ds) A D: the factors e^{ds} and e^{-ds} cancel.
struct FreeWavePropagator::Impl {
  Collocation<Quad> C;
  QMat AD, DinvAx;
  Impl(const RadialGrid& g, int d) : C(quad_grid(g)) {
    const auto [A, Ax] = halfwave_maps(C);
    AD = A * full(C, d);
    DinvAx = full_inverse(C, d) * Ax;
  }
  std::pair<QMat, QMat> transports(double ds) const {
    const int n = C.N + 1;
    QVec zm(n), zp(n);
    for (int k = 0; k < n; ++k) {
      const double y = static_cast<double>(C.x(k));
      zm(k) = characteristic_foot(y, ds, -1);
      zp(k) = characteristic_foot(y, ds, +1);
    }
    return {C.interpolation(zm), C.interpolation(zp)};
  }
};

FreeWavePropagator::FreeWavePropagator(const RadialGrid& g, int d) : grid_(g), d_(d) {
  check_dimension(d);
  impl_ = std::make_shared<const Impl>(g, d);
}

StateVector FreeWavePropagator::evolve(const StateVector& v, double ds) const {
  check_even_input(grid_, v);
  const int n = grid_.N() + 1;
  const auto [Tm, Tp] = impl_->transports(ds);
  QVec w = impl_->AD * detail::cast_vec<Quad>(v.stacked());
  w.head(n) = Tm * w.head(n);
  w.tail(n) = Tp * w.tail(n);
  return StateVector::from_stacked(detail::to_double(QVec(impl_->DinvAx * w)), Parity::even);
}

Eigen::MatrixXd FreeWavePropagator::matrix(double ds) const {
  const int n = grid_.N() + 1;
  const auto [Tm, Tp] = impl_->transports(ds);
  QMat TAD(2 * n, impl_->AD.cols());
  TAD.topRows(n) = Tm * impl_->AD.topRows(n);
  TAD.bottomRows(n) = Tp * impl_->AD.bottomRows(n);
  return detail::to_double(QMat(impl_->DinvAx * TAD));
}

Eigen::MatrixXd free_wave_matrix(const RadialGrid& g, int d, double ds) {
  return FreeWavePropagator(g, d).matrix(ds);
}

StateVector evolve_free_wave(const RadialGrid& g, int d, const StateVector& v, double ds) {
  check_dimension(d);
  check_even_input(g, v);
  return FreeWavePropagator(g, d).evolve(v, ds);
}

namespace {
struct FdSolution {
  std::vector<double> eta, f1, f2;
};

// Upwind scheme on the first-order system for q = (u, b) = (f1', f2):
//   d_s q = A d_eta q + B q,  A = [0 1; c12 c21],  B = [0 0; c11 c20],
// with A split along its characteristic families mu+- (roots of
// mu^2 - c21 mu - c12 = 0); family mu propagates with velocity -mu. f1 follows
// from d_s f1 = f2. Reflection at 0: u odd, b even.
FdSolution fd_evolve(int d, const RadialGrid& g, const StateVector& v, double ds, int n, double cfl) {
  const double R = g.R(), dx = R / n;
  std::vector<double> eta(n + 1);
  Eigen::VectorXd pts(n + 1);
  for (int i = 0; i <= n; ++i) pts(i) = eta[i] = i * dx;
  Eigen::VectorXd f1 = g.half_interpolation_matrix(pts, Parity::even) * v.f1;
  Eigen::VectorXd f2 = g.half_interpolation_matrix(pts, Parity::even) * v.f2;
  Eigen::VectorXd u = g.half_interpolation_matrix(pts, Parity::odd) * (g.D1(Parity::even) * v.f1);
  u(0) = 0.0;

  std::vector<WaveCoefficients> c(n + 1);
  std::vector<double> mup(n + 1), mum(n + 1);
  double speed = 0.0;
  for (int i = 0; i <= n; ++i) {
    c[i] = wave_coeffs(d, eta[i]);
    const double disc = c[i].c21 * c[i].c21 + 4.0 * c[i].c12;
    if (!(disc > 0.0)) throw std::logic_error("radial wave equation not strictly hyperbolic");
    mup[i] = 0.5 * (c[i].c21 + std::sqrt(disc));
    mum[i] = 0.5 * (c[i].c21 - std::sqrt(disc));
    speed = std::max({speed, std::abs(mup[i]), std::abs(mum[i])});
  }
  auto rhs = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& bb, Eigen::VectorXd& du,
                 Eigen::VectorXd& db) {
    auto U = [&](int j) { return j < 0 ? -uu(-j) : uu(j); };
    auto Bv = [&](int j) { return j < 0 ? bb(-j) : bb(j); };
    // Second-order one-sided difference toward increasing (dir = +1) or
    // decreasing (dir = -1) eta; centered where the forward stencil runs out.
    auto diff = [&](auto&& q, int i, int dir) {
      if (dir > 0 && i + 2 > n) return (q(i + 1 > n ? i : i + 1) - q(i - 1)) / ((i + 1 > n ? 1 : 2) * dx);
      return dir * (-3 * q(i) + 4 * q(i + dir) - q(i + 2 * dir)) / (2 * dx);
    };
    du.resize(n + 1);
    db.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      double Aqu = 0.0, Aqb = 0.0;
      const double delta = mup[i] - mum[i];
      for (int fam = 0; fam < 2; ++fam) {
        const double mu = fam == 0 ? mup[i] : mum[i], other = fam == 0 ? mum[i] : mup[i];
        // Information arrives from increasing eta when mu > 0.
        const int dir = mu > 0 ? 1 : -1;
        const double lq = -other * diff(U, i, dir) + diff(Bv, i, dir);  // l = (-mu_other, 1)
        const double a = (fam == 0 ? 1.0 : -1.0) * mu * lq / delta;     // r = (1, mu)
        Aqu += a;
        Aqb += a * mu;
      }
      const double lower = i == 0 ? c[0].eta_c11 * U(1) / dx : c[i].c11 * uu(i);
      du(i) = i == 0 ? 0.0 : Aqu;
      db(i) = Aqb + lower + c[i].c20 * bb(i);
    }
  };
  const int steps = static_cast<int>(std::ceil(ds * speed / (cfl * dx)));
  const double dt = ds / steps;
  Eigen::VectorXd k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
  for (int s = 0; s < steps; ++s) {
    rhs(u, f2, k1a, k1b);
    rhs(u + 0.5 * dt * k1a, f2 + 0.5 * dt * k1b, k2a, k2b);
    rhs(u + 0.5 * dt * k2a, f2 + 0.5 * dt * k2b, k3a, k3b);
    rhs(u + dt * k3a, f2 + dt * k3b, k4a, k4b);
    // d_s f1 = f2 integrated with the same stages.
    f1 += dt / 6.0 * (6.0 * f2 + dt * (k1b + k2b + k3b));
    u += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    f2 += dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
  }
  return {eta, std::vector<double>(f1.data(), f1.data() + f1.size()),
          std::vector<double>(f2.data(), f2.data() + f2.size())};
}
}  // namespace

StateVector direct_fd_oracle(const RadialGrid& g, int d, const StateVector& v, double ds, int n,
                             double cfl, bool richardson) {
  check_dimension(d);
  check_even_input(g, v);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("CFL number must lie in (0, 1]");
  if (n < 8) throw std::invalid_argument("finite-difference grid too coarse");
  const auto coarse = fd_evolve(d, g, v, ds, n, cfl);
  std::vector<double> x = coarse.eta, a = coarse.f1, b = coarse.f2;
  if (richardson) {
    const auto fine = fd_evolve(d, g, v, ds, 2 * n, cfl);
    for (int i = 0; i <= n; ++i) {
      a[i] = (4.0 * fine.f1[2 * i] - coarse.f1[i]) / 3.0;
      b[i] = (4.0 * fine.f2[2 * i] - coarse.f2[i]) / 3.0;
    }
  }
  const boost::math::barycentric_rational<double> ia(x.begin(), x.end(), a.begin(), 3);
  const boost::math::barycentric_rational<double> ib(x.begin(), x.end(), b.begin(), 3);
  StateVector out{Eigen::VectorXd(g.half_size()), Eigen::VectorXd(g.half_size()), Parity::even};
  for (int i = 0; i < g.half_size(); ++i) {
    out.f1(i) = ia(g.eta()(i));
    out.f2(i) = ib(g.eta()(i));
  }
  return out;
}

}  // namespace hsc
