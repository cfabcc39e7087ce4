#pragma once
// Closed-form layer: dimension parameters, height function, hyperboloidal
// similarity coordinates, metric data, wave-equation coefficients, the
// blowup profile, potential, nonlinearity and the symmetry mode.

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hsc/jet.hpp"

namespace hsc {

// Blowup constants as functions of n = d - 2 (real only for n >= 4).
double blowup_a(int n);
double blowup_b(int n);

struct DimensionParams {
  int d = 0;
  int n = 0;
  std::optional<double> a;  // present for d >= 7
  std::optional<double> b;

  double ad() const;  // throws std::logic_error when absent
  double bd() const;
};

// Rejects even d and d < 3 with std::invalid_argument.
DimensionParams make_params(int d);

// Height function of the hyperboloidal foliation. Must be even with
// |h'| < 1 and yh' - h > 0.
class HeightFunction {
 public:
  virtual ~HeightFunction() = default;
  // h(y) and its first four derivatives.
  virtual std::array<double, 5> derivatives(double y) const = 0;
  // q(y) = h'(y)/y together with q', q'' and q'/y, all regular at y = 0.
  virtual std::array<double, 4> slope_ratio(double y) const;
};

// h(y) = sqrt(2 + y^2) - 2.
class StandardHeight final : public HeightFunction {
 public:
  std::array<double, 5> derivatives(double y) const override;
  std::array<double, 4> slope_ratio(double y) const override;
};

const HeightFunction& standard_height();

struct HeightValues {
  double h, hp, hpp;
};
HeightValues height_eval(double y, const HeightFunction& hf = standard_height());

double h_plus(double y, const HeightFunction& hf = standard_height());
double h_minus(double y, const HeightFunction& hf = standard_height());
// Inverse-coordinate scalar g_T(t, x); satisfies g_T(eta_T(s, y)) = e^s.
double g_T(double T, double t, double x);
// Transition scalar between hyperboloidal and standard similarity coordinates.
double h_transition(double xi);

struct CartesianPoint {
  double t, x;
};
struct HyperboloidalPoint {
  double s, y;
};
CartesianPoint hsc_map(double T, double s, double y, const HeightFunction& hf = standard_height());
// Throws std::domain_error outside Omega_T = {|x| > t - T}.
HyperboloidalPoint hsc_inverse(double T, double t, double x);

// Tensor data of the coordinate map at (s, y) with y in R^d.
// Index 0 is time, indices 1..d are space.
struct GeometryTables {
  Eigen::MatrixXd jacobian;      // (kappa, mu) = d_mu eta^kappa
  Eigen::MatrixXd inv_jacobian;  // (mu, kappa) = (d_kappa (eta^{-1})^mu) o eta
  Eigen::MatrixXd g_lower;
  Eigen::MatrixXd g_upper;
  std::vector<Eigen::MatrixXd> christoffel;  // [lambda](mu, nu)
  double sqrt_det_g = 0.0;
};
GeometryTables geometry_tables(double s, const Eigen::VectorXd& y,
                               const HeightFunction& hf = standard_height());

// Max over nu of |(1/sqrt g) d_mu(g^{mu nu} sqrt g) + g^{kl} Gamma^nu_{kl}|,
// derivatives by sixth-order central differences with step `step`.
double contracted_christoffel_residual(double s, const Eigen::VectorXd& y, double step = 1e-3,
                                       const HeightFunction& hf = standard_height());

// g^{00} of the radial metric in hyperboloidal similarity coordinates.
double metric_g00(double s, double y, const HeightFunction& hf = standard_height());

// Height data lifted to a scalar type S (double or Jet in the variable eta).
template <class S>
struct HeightLift {
  S h, hp, hpp, q;  // q = h'/eta
};
HeightLift<double> lift_height(double eta, const HeightFunction& hf);
HeightLift<Jet> lift_height(const Jet& eta, const HeightFunction& hf);

// Regular parts of the coefficient functions. The odd functions c11 and c3
// carry a 1/eta singularity and are represented through eta*c11, eta*c3.
template <class S>
struct CoeffSet {
  S eta_c11, c12, c20, c21, c1, c2, eta_c3, c4, c2_over_eta;
};

template <class S>
CoeffSet<S> coefficient_set(int d, const S& eta, const HeightLift<S>& hl) {
  const S w = eta * hl.hp - hl.h;
  const S om = S(1.0) - hl.hp * hl.hp;
  const S hh = hl.h * hl.h - eta * eta;
  const S dm1 = S(static_cast<double>(d - 1));
  CoeffSet<S> c;
  c.eta_c11 = -(dm1 * w / om * hl.h) - hh / om * eta * eta * hl.hpp / w -
              S(2.0) * eta * (eta - hl.h * hl.hp) / om;
  c.c12 = hh / om;
  c.c20 = S(-1.0) - dm1 * w / om * hl.q - hh / om * hl.hpp / w;
  c.c21 = S(-2.0) * (eta - hl.h * hl.hp) / om;
  c.c1 = -(eta * hl.h) / w;
  c.c2 = -(eta * hl.hp) / w;
  c.eta_c3 = S(2.0) * w / om * hl.h;
  c.c4 = S(2.0) * w / om * hl.q;
  c.c2_over_eta = -hl.hp / w;
  return c;
}

// Coefficients of the radial wave equation in hyperboloidal similarity
// coordinates, the descent coefficients c1, c2 and the shift terms c3, c4.
// At eta = 0 the singular odd entries c11 and c3 are reported as 0; use
// eta_c11 and eta_c3 there.
struct WaveCoefficients {
  double c11, eta_c11, c12, c20, c21;
  double c1, c2, c2_over_eta;
  double c3, eta_c3, c4;
};
WaveCoefficients wave_coeffs(int d, double eta, const HeightFunction& hf = standard_height());

// |LHS - RHS| of the coefficient identities. `descent` holds the four
// identities for c1 c11', c1 c20', c1 c12', c1 c21' (d >= 3); `one_dim` the
// three identities of the d = 1 coefficients. Requires eta != 0.
struct IdentityResiduals {
  std::array<double, 4> descent{};
  std::array<double, 3> one_dim{};
  double max() const;
};
IdentityResiduals coefficient_identity_residuals(int d, double eta,
                                                 const HeightFunction& hf = standard_height());

// Blowup profile u_T^*(t, x); throws std::domain_error at (T, 0).
double blowup_profile(const DimensionParams& p, double T, double t, double x);
struct HscValue {
  double value, ds;
};
// u_T^* o eta_T and its s-derivative (independent of T).
HscValue blowup_profile_hsc(const DimensionParams& p, double s, double y,
                            const HeightFunction& hf = standard_height());
// d/dT u_T^* evaluated at eta_T(s, y).
double blowup_time_derivative_hsc(const DimensionParams& p, double s, double y,
                                  const HeightFunction& hf = standard_height());

double potential(const DimensionParams& p, double y, const HeightFunction& hf = standard_height());
double potential_ssc(const DimensionParams& p, double rho);
double nonlinearity_scalar(const DimensionParams& p, double y, double alpha,
                           const HeightFunction& hf = standard_height());
std::array<double, 2> symmetry_mode(const DimensionParams& p, double y,
                                    const HeightFunction& hf = standard_height());

}  // namespace hsc
