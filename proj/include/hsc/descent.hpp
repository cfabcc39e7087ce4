#pragma once
// Descent operators between radial wave equations in d and d - 2 dimensions,
// their inverses, the composite reduction to one dimension and the free
// radial wave semigroup built on top of it.
//
// Radial states in d >= 3 are even pairs on the half grid of a RadialGrid;
// one-dimensional states are odd pairs on its full grid. Matrices act on
// stacked vectors [f1; f2].
//
// The composite operators differentiate up to six times, so all descent
// arithmetic runs in quad precision internally; results are rounded to double.

#include <functional>
#include <memory>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "hsc/discretization.hpp"

namespace hsc {

using Quad = boost::multiprecision::float128;
using QuadFunction = std::function<Quad(const Quad&)>;
using QuadMatrix = Eigen::Matrix<Quad, Eigen::Dynamic, Eigen::Dynamic>;
using QuadVector = Eigen::Matrix<Quad, Eigen::Dynamic, 1>;

// Closed-form ingredients of the inverse of the descent step in dimension d.
struct DescentKernelData {
  int d;
  double phi11(double eta) const;  // h / eta^{d-2}
  double phi12(double eta) const;  // 1 / eta^{d-2}
  double phi21(double eta) const;  // (d-3) h / eta^{d-2}
  double phi22(double eta) const;  // (d-2) / eta^{d-2}
  double wronskian(double eta) const;  // -h' / eta^{2(d-2)}
  double t11(double eta) const;
  double t12(double eta) const;
  double t21(double eta) const;
  double t22(double eta) const;
};

// Free wave generator L_d on even pairs (half grid) and L_1 on odd pairs
// (full grid), in double precision.
Eigen::MatrixXd free_generator_matrix(const RadialGrid& g, int d);
Eigen::MatrixXd one_dim_generator_matrix(const RadialGrid& g);

// One descent step d -> d - 2 (d = 3 lands on odd full-grid pairs) and its
// inverse. Odd d >= 3 only; anything else throws std::invalid_argument.
Eigen::MatrixXd descent_step_matrix(const RadialGrid& g, int d);
Eigen::MatrixXd descent_step_inverse_matrix(const RadialGrid& g, int d);

// The four blocks T11, T12, T21, T22 of the inverse step for d >= 5.
struct InverseBlocks {
  Eigen::MatrixXd T11, T12, T21, T22;
};
InverseBlocks descent_inverse_blocks(const RadialGrid& g, int d);

// Composite D_d = D_3 o ... o D_d and its inverse.
Eigen::MatrixXd descent_full_matrix(const RadialGrid& g, int d);
Eigen::MatrixXd descent_full_inverse_matrix(const RadialGrid& g, int d);

// The composite maps before rounding, for data known to quad precision.
QuadMatrix descent_full_matrix_quad(const RadialGrid& g, int d);
QuadMatrix descent_full_inverse_matrix_quad(const RadialGrid& g, int d);
// Half-grid nodes in quad precision.
QuadVector quad_half_nodes(const RadialGrid& g);

// State-level maps. Inputs must carry the expected parity tag (even for
// d-dimensional data, odd for one-dimensional data) and odd inputs must be
// odd at the nodes; violations throw std::invalid_argument.
StateVector descent_step(const RadialGrid& g, int d, const StateVector& v);
StateVector descent_step_inverse(const RadialGrid& g, int d, const StateVector& w);
StateVector descent_full(const RadialGrid& g, int d, const StateVector& v);
StateVector descent_full_inverse(const RadialGrid& g, int d, const StateVector& w);

// || D_d L_d v - D_d v - L_1 D_d v ||_k / ||v||_k for v = (f1, f2) sampled in
// quad precision. The first norm is the plain H^k x H^{k-1} norm of the odd
// pair, the second the weighted radial norm.
double intertwining_residual(const RadialGrid& g, int d, const QuadFunction& f1,
                             const QuadFunction& f2, int k = 1);
// || D_d L_d v - L_{d-2} D_d v ||_k / ||v||_k for a single step, d >= 5.
double step_intertwining_residual(const RadialGrid& g, int d, const QuadFunction& f1,
                                  const QuadFunction& f2, int k = 1);

// S_d(ds) = e^{ds} D_d^{-1} S_1(ds) D_d with the descent operators of one
// dimension cached.
class FreeWavePropagator {
 public:
  FreeWavePropagator(const RadialGrid& g, int d);
  int dimension() const { return d_; }
  StateVector evolve(const StateVector& v, double ds) const;
  Eigen::MatrixXd matrix(double ds) const;

 private:
  struct Impl;
  RadialGrid grid_;
  int d_;
  std::shared_ptr<const Impl> impl_;
};

Eigen::MatrixXd free_wave_matrix(const RadialGrid& g, int d, double ds);
StateVector evolve_free_wave(const RadialGrid& g, int d, const StateVector& v, double ds);

// Reference solution of the radial wave equation by second-order finite
// differences on a uniform grid of n intervals in [0, R] (even reflection at
// 0, one-sided stencils at the outflow boundary R), RK4 in s at the given CFL
// number, Richardson-extrapolated from n and 2n. Returns the solution on the
// half nodes of g. With richardson = false only the n-interval run is used.
// Throws std::invalid_argument for cfl outside (0, 1].
StateVector direct_fd_oracle(const RadialGrid& g, int d, const StateVector& v, double ds,
                             int n = 400, double cfl = 0.4, bool richardson = true);

}  // namespace hsc
