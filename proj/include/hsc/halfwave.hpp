#pragma once
// One-dimensional machinery: half-wave decomposition, the vector fields
// L+-, D+-, exact characteristic transport of half-waves and the rescaled
// 1-d wave semigroup. All data live on the full grid [-R, R].

#include <functional>

#include <Eigen/Dense>

#include "hsc/discretization.hpp"

namespace hsc {

struct HalfWaveState {
  Eigen::VectorXd vm, vp;  // v_-, v_+
};

// Max over nodes of |v_-(-y) + v_+(y)|.
double halfwave_parity_defect(const HalfWaveState& w);

// L+- f = -((y +- h)/(1 +- h')) f' and D+- f = f'/(1 +- h'); sign is +1 or -1.
Eigen::VectorXd apply_L_pm(const RadialGrid& g, const Eigen::VectorXd& f, int sign);
Eigen::VectorXd apply_D_pm(const RadialGrid& g, const Eigen::VectorXd& f, int sign);

// A and its inverse. Decompose rejects non-odd components, recompose rejects
// states violating the parity constraint (std::invalid_argument).
HalfWaveState halfwave_decompose(const RadialGrid& g, const StateVector& v);
StateVector halfwave_recompose(const RadialGrid& g, const HalfWaveState& w);

// z with h+-(z) = e^{-ds} h+-(y): the foot of the characteristic through y
// after time ds. Safeguarded Newton iteration on the monotone h+-.
double characteristic_foot(double y, double ds, int sign);

// v+-(s0 + ds, .) = v+-(s0, z(.)).
HalfWaveState evolve_halfwave(const RadialGrid& g, const HalfWaveState& w, double ds);

// Dense matrices on full-grid data: the exact transport for one sign, and
// the rescaled semigroup S1(ds) acting on stacked odd states [f1; f2].
Eigen::MatrixXd transport_matrix(const RadialGrid& g, double ds, int sign);
Eigen::MatrixXd s1_matrix(const RadialGrid& g, double ds);

StateVector evolve_S1(const RadialGrid& g, const StateVector& v, double ds);

// Closed-form solution of the 1-d wave equation with odd data u(0) = f,
// u_t(0) = g, evaluated on the hyperboloid: returns (v, d_s v) at (s, y).
struct DalembertData {
  std::function<double(double)> f, fp, g;
};
std::pair<double, double> dalembert_oracle(const DalembertData& data, double T, double s, double y);

}  // namespace hsc
