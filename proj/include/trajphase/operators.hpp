#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "trajphase/schedule.hpp"

namespace trajphase {

using cd = std::complex<double>;

/// Dense square operator. Hamiltonians carry angular-frequency units (hbar = 1),
/// Lindblad operators are dimensionless.
using Operator = Eigen::MatrixXcd;

/// Possibly unnormalized pure state.
using PureState = Eigen::VectorXcd;

using OperatorSchedule = Schedule<Operator>;
using ComplexSchedule = Schedule<cd>;
using RealSchedule = Schedule<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cd I{0.0, 1.0};

/// Default substep count for one evolution interval.
inline constexpr int kDefaultSteps = 4096;

enum class Axis { x, y, z };

Operator pauli(Axis axis);
Operator identity(int dim);

/// Truncated lowering operator: <n-1|a|n> = sqrt(n) for 1 <= n < dim.
Operator annihilation(int dim);

/// Quadratures x = (a + a^dag)/sqrt2 and p = (a - a^dag)/(i sqrt2) at truncation dim.
Operator position_quadrature(int dim);
Operator momentum_quadrature(int dim);

inline Operator adjoint(const Operator& a) { return a.adjoint(); }
Operator commutator(const Operator& a, const Operator& b);

/// Largest entry magnitude.
double max_abs(const Operator& a);
double max_abs(const PureState& v);

bool is_hermitian(const Operator& a, double tol);
bool is_normal(const Operator& a, double tol);

/// exp(a). Normal matrices go through a Schur (= unitary eigen) decomposition,
/// everything else through scaling and squaring of the Taylor series.
Operator expm(const Operator& a);

/// T exp(-i int_{t0}^{t1} K dt), composed from `steps` substeps with the exact
/// exponential of the midpoint generator on each substep.
Operator time_ordered_propagator(const OperatorSchedule& k, double t0, double t1, int steps = kDefaultSteps);

struct BlochAngles {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2pi)
};

/// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
PureState state_from_bloch(const BlochAngles& angles);

/// Inverse of state_from_bloch for any nonzero qubit vector (normalization and
/// global phase are dropped). phi is reported as 0 at the poles.
BlochAngles bloch_from_state(const PureState& psi);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double x);

}  // namespace trajphase
