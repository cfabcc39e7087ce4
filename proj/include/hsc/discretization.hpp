#pragma once
// Chebyshev-Lobatto collocation on [-R, R] with parity-folded half grids on
// [0, R], Clenshaw-Curtis quadrature, weighted radial Sobolev norms and the
// auxiliary operators used to test norm bounds.

#include <functional>
#include <utility>

#include <Eigen/Dense>

namespace hsc {

enum class Parity { even, odd, none };

inline Parity flip(Parity p) {
  return p == Parity::even ? Parity::odd : (p == Parity::odd ? Parity::even : Parity::none);
}

// Clenshaw-Curtis nodes (increasing) and weights on [a, b] with n + 1 points.
std::pair<Eigen::VectorXd, Eigen::VectorXd> clenshaw_curtis(int n, double a, double b);

class RadialGrid {
 public:
  // N intervals on [-R, R] (N even so that 0 is a node). Rejects R < 1/2,
  // N < 8 and odd N with std::invalid_argument.
  RadialGrid(double R, int N, Parity parity = Parity::even);

  double R() const { return R_; }
  int N() const { return N_; }
  Parity parity() const { return parity_; }

  // Working representation: the half grid for even/odd parity, the full grid otherwise.
  const Eigen::VectorXd& nodes() const { return parity_ == Parity::none ? x_ : eta_; }
  int size() const { return static_cast<int>(nodes().size()); }
  const Eigen::MatrixXd& D1() const { return D1(parity_); }
  const Eigen::MatrixXd& D2() const { return D2(parity_); }
  const Eigen::VectorXd& weights() const { return parity_ == Parity::none ? w_ : w_half_; }

  // Half grid 0 = eta_0 < ... < eta_{M-1} = R, M = N/2 + 1.
  const Eigen::VectorXd& eta() const { return eta_; }
  int half_size() const { return static_cast<int>(eta_.size()); }
  // Derivative matrices acting on half-grid values of a function of parity p
  // (Parity::none gives the full-grid matrices).
  const Eigen::MatrixXd& D1(Parity p) const;
  const Eigen::MatrixXd& D2(Parity p) const;
  // Integration over [0, R]; exact for even integrands of degree < N.
  const Eigen::VectorXd& half_weights() const { return w_half_; }

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& full_weights() const { return w_; }
  // (A f)_k = int_0^{x_k} f on the full grid.
  const Eigen::MatrixXd& antiderivative() const { return A_; }

  Eigen::VectorXd unfold(const Eigen::VectorXd& half, Parity p) const;
  Eigen::VectorXd fold(const Eigen::VectorXd& full) const;
  // Folds a full-grid operator to the half grid for inputs of parity p.
  Eigen::MatrixXd fold_operator(const Eigen::MatrixXd& full, Parity p) const;

  double interpolate(const Eigen::VectorXd& full, double x) const;
  // Rows evaluate the full-grid interpolant at the given points.
  Eigen::MatrixXd interpolation_matrix(const Eigen::VectorXd& points) const;
  // Same for half-grid values of parity p.
  Eigen::MatrixXd half_interpolation_matrix(const Eigen::VectorXd& points, Parity p) const;

  // Max deviation of full-grid values from the given parity.
  double parity_defect(const Eigen::VectorXd& full, Parity p) const;

 private:
  double R_;
  int N_;
  Parity parity_;
  Eigen::VectorXd x_, w_, bary_, eta_, w_half_;
  Eigen::MatrixXd Df1_, Df2_, A_, D1e_, D1o_, D2e_, D2o_;
};

// Two-component radial state (field, s-derivative) on a shared grid.
struct StateVector {
  Eigen::VectorXd f1, f2;
  Parity parity = Parity::even;
  Eigen::VectorXd stacked() const;
  static StateVector from_stacked(const Eigen::VectorXd& v, Parity p = Parity::even);
};

// sum_{j <= k} || d^j (eta^m f) ||_{L^2(-R, R)}, m = (d - 1)/2, for half-grid
// values f of parity p. Throws std::invalid_argument when k > N/4.
double weighted_sobolev_norm(const RadialGrid& g, const Eigen::VectorXd& f, int k, int d,
                             Parity p = Parity::even);
// ||f1||_k + ||f2||_{k-1} in the weighted norm.
double state_norm(const RadialGrid& g, const StateVector& v, int k, int d);
// Plain H^k(-R, R) norm of full-grid values.
double full_sobolev_norm(const RadialGrid& g, const Eigen::VectorXd& f, int k);

// int_{-R}^{R} f g (1 +- h') for full-grid values; sign is +1 or -1.
double hpm_inner(const RadialGrid& g, const Eigen::VectorXd& f, const Eigen::VectorXd& h,
                 int sign);

// Extension of full-grid data from [-R, R] to the line, C^k across +-R and
// supported in [-2R, 2R], evaluated at the given points.
Eigen::VectorXd extension_operator(const RadialGrid& g, const Eigen::VectorXd& f, int k,
                                   const Eigen::VectorXd& points);
// Same construction for data given as a function on [-R, R].
Eigen::VectorXd extension_operator(const std::function<double(double)>& f, double R, int k,
                                   const Eigen::VectorXd& points);

// Both sides of the Hardy inequality || |x|^s f || <= C || |x|^{s+1} f' || on
// (-R, R), for s < -1/2. Returns (lhs, rhs).
std::pair<double, double> hardy_check(const RadialGrid& g, const Eigen::VectorXd& f, double s);

// T f(x) = x^{-m} int_0^x y^n phi(y) f(y) dy = x^{n+1-m} int_0^1 t^n phi(tx) f(tx) dt
// on the full grid. Requires n + 1 - m >= 0.
Eigen::VectorXd integral_op_T(const RadialGrid& g, const Eigen::VectorXd& f, int m, int n,
                              const std::function<double(double)>& phi);

}  // namespace hsc
