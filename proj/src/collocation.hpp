#pragma once
// Chebyshev-Lobatto collocation templated on the scalar type. The descent
// layer runs in quad precision: composite descent operators differentiate
// up to six times, which amplifies double roundoff beyond usefulness.

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "hsc/model.hpp"

namespace hsc::detail {

using Quad = boost::multiprecision::float128;

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Clenshaw-Curtis rule on [0, 1] with n + 1 increasing nodes.
template <class S>
std::pair<VecT<S>, VecT<S>> cc_unit(int n) {
  using std::cos;
  const S pi = boost::math::constants::pi<S>();
  VecT<S> x(n + 1), w(n + 1);
  for (int k = 0; k <= n; ++k) {
    const S theta = pi * S(k) / S(n);
    x(n - k) = S(0.5) + S(0.5) * cos(theta);
    S v = 1;
    if (k == 0 || k == n) {
      w(n - k) = (n % 2 == 0 ? S(1) / S(n * n - 1) : S(1) / S(n * n)) / S(2);
      continue;
    }
    for (int j = 1; j <= n / 2; ++j) {
      const S b = (2 * j == n) ? S(1) : S(2);
      v -= b * cos(S(2 * j) * theta) / S(4 * j * j - 1);
    }
    w(n - k) = v / S(n);  // 2 v / n on [-1, 1], halved for [0, 1]
  }
  x(0) = 0;
  x(n) = 1;
  return {x, w};
}

template <class S>
struct Collocation {
  int N, c, M;
  S R;
  VecT<S> x, bary, eta;
  MatT<S> D1, D2, U, D1e, D2e;

  Collocation(double radius, int n) : N(n), c(n / 2), M(n / 2 + 1), R(radius) {
    using std::cos;
    const S pi = boost::math::constants::pi<S>();
    x.resize(N + 1);
    bary.resize(N + 1);
    for (int k = 0; k <= c; ++k) {
      const S v = R * cos(pi * S(k) / S(N));
      x(k) = -v;
      x(N - k) = v;
    }
    x(c) = 0;
    for (int k = 0; k <= N; ++k) bary(k) = (k % 2 ? S(-1) : S(1)) * ((k == 0 || k == N) ? S(0.5) : S(1));
    D1 = MatT<S>::Zero(N + 1, N + 1);
    D2 = MatT<S>::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
      S sum = 0;
      for (int j = 0; j <= N; ++j)
        if (i != j) {
          D1(i, j) = (bary(j) / bary(i)) / (x(i) - x(j));
          sum += D1(i, j);
        }
      D1(i, i) = -sum;
    }
    for (int i = 0; i <= N; ++i) {
      S sum = 0;
      for (int j = 0; j <= N; ++j)
        if (i != j) {
          D2(i, j) = S(2) * D1(i, j) * (D1(i, i) - S(1) / (x(i) - x(j)));
          sum += D2(i, j);
        }
      D2(i, i) = -sum;
    }
    eta = x.tail(M);
    U = MatT<S>::Zero(N + 1, M);
    for (int i = 0; i < M; ++i) {
      U(c + i, i) = 1;
      if (i > 0) U(c - i, i) = 1;
    }
    D1e = (D1 * U).bottomRows(M);
    D2e = (D2 * U).bottomRows(M);
  }

  // Rows evaluate the full-grid interpolant at the given points.
  MatT<S> interpolation(const VecT<S>& pts) const {
    MatT<S> P = MatT<S>::Zero(pts.size(), N + 1);
    for (int r = 0; r < pts.size(); ++r) {
      int hit = -1;
      for (int j = 0; j <= N; ++j)
        if (pts(r) == x(j)) hit = j;
      if (hit >= 0) {
        P(r, hit) = 1;
        continue;
      }
      S total = 0;
      for (int j = 0; j <= N; ++j) {
        P(r, j) = bary(j) / (pts(r) - x(j));
        total += P(r, j);
      }
      P.row(r) /= total;
    }
    return P;
  }

  // (A f)_k = int_0^{x_k} f = x_k int_0^1 f(tau x_k) dtau, exact for the interpolant.
  MatT<S> antiderivative() const {
    const auto [tau, w] = cc_unit<S>(N + 2);
    const int nt = static_cast<int>(tau.size());
    VecT<S> pts((N + 1) * nt);
    for (int k = 0; k <= N; ++k)
      for (int j = 0; j < nt; ++j) pts(k * nt + j) = tau(j) * x(k);
    const MatT<S> P = interpolation(pts);
    MatT<S> A = MatT<S>::Zero(N + 1, N + 1);
    for (int k = 0; k <= N; ++k)
      for (int j = 0; j < nt; ++j) A.row(k) += w(j) * x(k) * P.row(k * nt + j);
    return A;
  }
};

// Height data of the standard height function in closed form.
template <class S>
HeightLift<S> standard_lift(const S& eta) {
  using std::sqrt;
  const S s = sqrt(S(2) + eta * eta);
  return {s - S(2), eta / s, S(2) / (s * s * s), S(1) / s};
}

template <class S>
VecT<S> cast_vec(const Eigen::VectorXd& v) {
  VecT<S> out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = S(v(i));
  return out;
}

template <class S>
Eigen::VectorXd to_double(const VecT<S>& v) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = static_cast<double>(v(i));
  return out;
}

template <class S>
Eigen::MatrixXd to_double(const MatT<S>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = static_cast<double>(m(i, j));
  return out;
}

}  // namespace hsc::detail
