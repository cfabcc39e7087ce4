#pragma once
// Blowup stability experiment for the equivariant Yang-Mills equation:
// Cauchy evolution of a perturbed profile in (t, r), the initial data
// operator on the hyperboloid s = s0, nonlinear hyperboloidal evolution,
// shooting in the blowup time T and decay measurement.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsc/discretization.hpp"
#include "hsc/linstab.hpp"
#include "hsc/model.hpp"

namespace hsc {

// Smooth bump amplitude * exp(1 - 1/(1 - (r/epsilon)^2)) on |r| < epsilon,
// added with weight_f to u(0, .) and with weight_g to u_t(0, .).
struct PerturbationSpec {
  double amplitude = 1e-3;
  double epsilon = 0.05;
  double weight_f = 1.0;
  double weight_g = 0.0;
};
double bump(const PerturbationSpec& f, double r);

// s0 = log(-h(0) / (1 + 2 epsilon)).
double initial_time(double epsilon);

// u_T^*(t, r) with its t- and r-derivatives.
struct ProfileValue {
  double u, ut, ur;
};
ProfileValue profile_tr(const DimensionParams& p, double T, double t, double r);

// Perturbation w = u - u_1^* of the (t, r) equation
//   -u_tt + u_rr + (d - 1)/r u_r = (d - 4)(r^2 u^3 + 3 u^2)
// by second-order leapfrog (flux-form Laplacian, weak fourth-difference
// damping) on [0, r_max], run backward
// and forward from t = 0. r_max = epsilon + max(|t_lo|, |t_hi|) + margin, so
// w vanishes at the outer boundary by finite speed of propagation.
class CauchySolution {
 public:
  struct Sample {
    double w, wt, wr;
  };
  // Cubic interpolation in t and r. Zero for r >= r_max; std::out_of_range
  // when t leaves [t_lo, t_hi].
  Sample sample(double t, double r) const;
  double t_lo() const { return t0_ + dt_ * lo_; }
  double t_hi() const { return t0_ + dt_ * hi_; }
  double r_max() const { return dr_ * J_; }
  double dr() const { return dr_; }
  double dt() const { return dt_; }
  // Largest |w| over the stored levels.
  double max_abs() const;
  // Largest |w| at r >= |t| + epsilon + 2 dr.
  double outside_cone() const;

 private:
  friend CauchySolution cauchy_tr_solver(const DimensionParams&, const PerturbationSpec&, double,
                                         double, double, double);
  double value(int n, int j) const;
  double dr_ = 0, dt_ = 0, t0_ = 0, eps_ = 0;
  int J_ = 0, lo_ = 0, hi_ = 0;
  std::vector<Eigen::VectorXd> levels_;  // levels_[n - lo_] at t = n dt
};

// Requires t_lo <= 0 <= t_hi < 1 and d >= 7. Throws std::runtime_error
// ("local existence window exceeded") when |w| grows beyond 1.
CauchySolution cauchy_tr_solver(const DimensionParams& p, const PerturbationSpec& f, double t_lo,
                                double t_hi, double dr = 0.0, double cfl = 0.45);

struct HyperboloidalIC {
  StateVector state;
  double s0 = 0.0;
  double T = 1.0;
};

// e^{-2 s0} [(u_f - u_T^*) o eta_T, d_s (u_f - u_T^*) o eta_T] at s = s0 on the
// half grid. Throws std::out_of_range when the hyperboloid leaves the solved
// window and std::invalid_argument for T outside [1 - eps, 1 + eps].
HyperboloidalIC initial_data_operator(const DimensionParams& p, const RadialGrid& g,
                                      const CauchySolution& sol, const PerturbationSpec& f,
                                      double T);

// Everything the hyperboloidal evolution reuses between runs.
struct ExperimentSetup {
  DimensionParams params;
  RadialGrid grid;
  OperatorMatrix L;
  OperatorMatrix P;  // Riesz projection onto the symmetry mode
  Eigen::VectorXd mode;  // f1* stacked
  double gap = 0.0;      // spectral gap of L
  int k = 2;             // derivative count of the norm monitor
};
// N = 128: at N = 96 the decay fit is not yet resolved.
ExperimentSetup make_setup(int d, double R = 2.0, int N = 128, int k = 2);

// <P v, f1*> / |f1*|^2.
double projection_coefficient(const ExperimentSetup& e, const StateVector& v);

struct TrajectoryPoint {
  double s, norm_k, norm_km1, projection;
};
struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::vector<StateVector> states;  // at the sample times
  bool exploded = false;            // unstable-mode-dominated run, stopped early
};

// RK4 for d_s Phi = L Phi + N(Phi) from ic.s0 to s_end with `samples`
// equally spaced outputs. dt <= 0 picks 0.8 of the linear RK4 step. The run
// stops (exploded = true) when max |Phi_1| exceeds 1.
Trajectory evolve_nonlinear(const ExperimentSetup& e, const HyperboloidalIC& ic, double s_end,
                            int samples = 41, double dt = 0.0, bool nonlinear = true);

struct DecayFit0 {
  double omega0 = 0.0;    // minus the slope of log(norm) against s
  double residual = 0.0;  // rms of the log-linear fit
  bool monotone_tail = true;
};
// Needs at least 10 samples. Zero norms give omega0 = +inf.
DecayFit0 decay_fit(const std::vector<double>& s, const std::vector<double>& norms);

struct DecayReport {
  std::vector<TrajectoryPoint> series;
  DecayFit0 fit_k, fit_km1;
  double T = 1.0;
  double s0 = 0.0;
  double fit_begin = 0.0;
};

struct ShootingOptions {
  double span = 12.0;      // s_end - s0; longer spans hit the rounding floor in T
  double fit_begin = 8.0;  // fit from s0 + fit_begin, past the fast modes
  double window = 0.05;    // initial half-width of the T bracket
  int samples = 51;
  bool nonlinear = true;
  double dr = 0.0;         // (t, r) spacing, 0 = epsilon / 320
  double dt = 0.0;         // RK4 step in s, 0 = 0.8 of the linear limit
};

struct BlowupTimeResult {
  double T_star = 1.0;
  int evaluations = 0;
  double a_lo = 0.0, a_hi = 0.0;  // a(T) at the final bracket ends
  double T_lo = 1.0, T_hi = 1.0;
  DecayReport report;
  Trajectory trajectory;
};

// Zero of a(T) = projection coefficient of Phi_T at s0 + span. Throws
// std::runtime_error("instability not one-dimensional at this resolution")
// when no sign change is found in [1 - eps, 1 + eps].
BlowupTimeResult adjust_blowup_time(const ExperimentSetup& e, const PerturbationSpec& f,
                                    const ShootingOptions& opt = {});

std::string to_csv(const DecayReport& r);
std::string to_json(const BlowupTimeResult& r, const ExperimentSetup& e, const PerturbationSpec& f);

}  // namespace hsc
