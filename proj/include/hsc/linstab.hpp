#pragma once
// Linearized operator L = L_d - 2I + L_V around the blowup profile: assembly,
// filtered spectrum, Riesz projection onto the symmetry mode, linear
// evolution, the hyperboloidal mode equation and the connection problem of
// the mode equation in standard similarity coordinates.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsc/discretization.hpp"
#include "hsc/model.hpp"

namespace hsc {

using cplx = std::complex<double>;

// Dense matrix acting on stacked even states [f1; f2] on the half grid.
struct OperatorMatrix {
  Eigen::MatrixXd A;
  RadialGrid grid;
  int d;
  std::string label;  // "L_d", "L_V", "L" or "projection"
};

// Require d >= 7 (the profile exists only there) and an even grid with
// N >= 48; otherwise std::invalid_argument.
OperatorMatrix assemble_free(const DimensionParams& p, const RadialGrid& g);
OperatorMatrix assemble_potential(const DimensionParams& p, const RadialGrid& g);
OperatorMatrix assemble_L(const DimensionParams& p, const RadialGrid& g);

// f1* sampled on the half grid.
StateVector symmetry_mode_state(const DimensionParams& p, const RadialGrid& g);
// || L f1* - f1* || / || f1* || in the node norm.
double eigen_identity_residual(const OperatorMatrix& L);
// Throws std::runtime_error when the residual exceeds 1e-4 (grid too coarse).
void require_resolved(const OperatorMatrix& L);

struct SpectrumResult {
  int d = 0;
  double R = 0.0;
  int N = 0, N_check = 0;
  std::vector<cplx> raw;       // all eigenvalues at N
  std::vector<cplx> filtered;  // window eigenvalues confirmed at N_check, by decreasing real part
  std::vector<bool> stable;    // per filtered eigenvalue: Re < 0
  int unstable_count = 0;
  cplx top;                    // filtered eigenvalue of largest real part
  double gap = 0.0;            // largest real part among the others (negative when stable)
  Eigen::VectorXd top_vector;  // real eigenvector of `top`
  double angle_to_symmetry_mode = 0.0;
  // Exactly one filtered eigenvalue with Re >= 0, within tol of 1.
  bool mode_stable(double tol = 1e-6) const;
};

// Eigenvalues of L at N and N + dN; an eigenvalue with Re >= window is kept
// when the other resolution has one within tol.
SpectrumResult spectrum(const DimensionParams& p, double R, int N, int dN = 16, double tol = 1e-4,
                        double window = -1.0);
std::string to_json(const SpectrumResult& s);

// (1/2 pi i) \oint (z - L)^{-1} dz over |z - center| = radius by the
// trapezoid rule with M nodes. Throws std::invalid_argument when an
// eigenvalue of L lies within `clearance` of the contour.
OperatorMatrix riesz_projection(const OperatorMatrix& L, cplx center = 1.0, double radius = 1.0,
                                int M = 64, double clearance = 1e-3);

// RK4 time step for L: 1 / spectral radius.
double rk4_stable_step(const OperatorMatrix& L);
// RK4 for d_s v = L v. dt <= 0 selects rk4_stable_step. Throws
// std::runtime_error when the norm exceeds 1e3 e^{2 s} ||v||.
StateVector evolve_linear(const OperatorMatrix& L, const StateVector& v, double ds, double dt = 0.0);

struct DecayFit {
  double rate = 0.0;  // least-squares slope of log ||v(s)||
  std::vector<double> s, norms;
};
// Samples the weighted norm of order k (default (d - 1)/2) at `samples`
// equally spaced times in [s_begin, s_end] and fits an exponent.
DecayFit linear_decay_fit(const OperatorMatrix& L, const StateVector& v, double s_end = 5.0,
                          int samples = 21, int k = -1, double s_begin = 0.0);
// Least-squares slope of log(values) against times.
double fitted_exponent(const std::vector<double>& t, const std::vector<double>& values);

// Mode equation f'' + p f' + q f = 0 for L f = lambda f in the hyperboloidal
// variable. Throws std::domain_error at the singular points 0 and 1/2.
struct ModeODECoefficients {
  cplx p, q;
};
ModeODECoefficients mode_ode_coeffs(const DimensionParams& p, cplx lambda, double eta);
// Frobenius indices from the coefficient limits: {0, 1 - lim (eta - eta0) p}.
struct FrobeniusIndices {
  std::array<cplx, 2> at_zero, at_half;
};
FrobeniusIndices frobenius_indices(const DimensionParams& p, cplx lambda);

// Mode equation in standard similarity coordinates:
// (1 - r^2) g'' + ((d - 1)/r - 2(l + 3) r) g' - (l + 2)(l + 3) g + V(r) g = 0.
// Analytic solutions are launched by Frobenius series from r = 0 and r = 1
// and matched at `match`.
struct SscConnection {
  cplx determinant;  // g0 g1' - g0' g1, analytic in lambda
  double normalized = 0.0;  // |det| / (|g0 g1'| + |g0' g1|)
  cplx g0, dg0, g1, dg1;
};
SscConnection ssc_mode_scan(const DimensionParams& p, cplx lambda, double match = 0.5);
// Analytic solution from the origin with g(0) = 1, at r in [0, 1).
cplx ssc_regular_solution(const DimensionParams& p, cplx lambda, double r);

struct SscZeroScan {
  int winding = 0;           // zeros inside the rectangle, by the argument principle
  std::vector<cplx> zeros;   // polished zeros found from grid minima
  double min_boundary = 0.0; // smallest normalized determinant on the boundary
};
SscZeroScan ssc_zero_scan(const DimensionParams& p, double re_lo = 0.0, double re_hi = 2.0,
                          double im_max = 2.0, int grid = 40);

}  // namespace hsc
