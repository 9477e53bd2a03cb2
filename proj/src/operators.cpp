#include "trajphase/operators.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace trajphase {

Operator pauli(Axis axis) {
    Operator s(2, 2);
    switch (axis) {
        case Axis::x: s << 0, 1, 1, 0; break;
        case Axis::y: s << 0, -I, I, 0; break;
        case Axis::z: s << 1, 0, 0, -1; break;
    }
    return s;
}

Operator identity(int dim) {
    if (dim < 1) throw InvalidArgument("identity: dimension must be positive");
    return Operator::Identity(dim, dim);
}

Operator annihilation(int dim) {
    if (dim < 2) throw InvalidArgument("annihilation: dimension must be >= 2, got " + std::to_string(dim));
    Operator a = Operator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Operator position_quadrature(int dim) {
    const Operator a = annihilation(dim);
    return (a + a.adjoint()) / std::sqrt(2.0);
}

Operator momentum_quadrature(int dim) {
    const Operator a = annihilation(dim);
    return (a - a.adjoint()) / (I * std::sqrt(2.0));
}

Operator commutator(const Operator& a, const Operator& b) {
    if (a.rows() != b.rows()) throw InvalidArgument("commutator: dimension mismatch");
    return a * b - b * a;
}

double max_abs(const Operator& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }
double max_abs(const PureState& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Operator& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(Operator(a - a.adjoint())) <= tol;
}

bool is_normal(const Operator& a, double tol) {
    const Operator c = a * a.adjoint() - a.adjoint() * a;
    return max_abs(c) <= tol * std::max(1.0, max_abs(a) * max_abs(a));
}

namespace {

Operator expm_series(const Operator& a) {
    // scale so that the 1-norm is below 1/2, sum the series, square back
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Operator scaled = a / std::ldexp(1.0, squarings);

    const auto n = a.rows();
    Operator result = Operator::Identity(n, n);
    Operator term = Operator::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (max_abs(term) <= 1e-18 * max_abs(result)) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace

Operator expm(const Operator& a) {
    if (a.rows() != a.cols()) throw InvalidArgument("expm: matrix must be square");
    if (a.rows() == 0) return a;
    if (is_hermitian(a, 1e-14 * std::max(1.0, max_abs(a)))) {
        Eigen::SelfAdjointEigenSolver<Operator> es(a);
        const Eigen::VectorXcd d = es.eigenvalues().cast<cd>().array().exp();
        return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
    }
    if (is_normal(a, 1e-12)) {
        // Schur form of a normal matrix is diagonal, with unitary Schur vectors
        Eigen::ComplexSchur<Operator> schur(a);
        const Eigen::VectorXcd d = schur.matrixT().diagonal().array().exp();
        return schur.matrixU() * d.asDiagonal() * schur.matrixU().adjoint();
    }
    return expm_series(a);
}

Operator time_ordered_propagator(const OperatorSchedule& k, double t0, double t1, int steps) {
    if (steps < 1) throw InvalidArgument("time_ordered_propagator: steps must be >= 1");
    if (t1 < t0) throw InvalidArgument("time_ordered_propagator: t1 < t0");
    if (!k.covers(t0, t1)) throw DomainError("time_ordered_propagator: schedule does not cover the interval");
    const Eigen::Index n = k.values().front().rows();
    const double h = (t1 - t0) / steps;
    if (k.is_constant()) {
        const Operator step = expm(Operator(-I * h * k.values().front()));
        Operator u = Operator::Identity(n, n);
        for (int s = 0; s < steps; ++s) u = step * u;
        return u;
    }
    Operator u = Operator::Identity(n, n);
    for (int s = 0; s < steps; ++s) {
        const double mid = t0 + (s + 0.5) * h;
        u = expm(Operator(-I * h * k.at(mid))) * u;
    }
    return u;
}

PureState state_from_bloch(const BlochAngles& angles) {
    PureState psi(2);
    psi << std::cos(angles.theta / 2), std::polar(std::sin(angles.theta / 2), angles.phi);
    return psi;
}

BlochAngles bloch_from_state(const PureState& psi) {
    if (psi.size() != 2) throw InvalidArgument("bloch_from_state: qubit state required");
    const double norm = psi.norm();
    if (norm == 0.0) throw InvalidArgument("bloch_from_state: zero vector");
    const double a = std::abs(psi(0)) / norm;
    const double b = std::abs(psi(1)) / norm;
    BlochAngles out;
    out.theta = 2.0 * std::atan2(b, a);
    if (a == 0.0 || b == 0.0) return out;
    double phi = std::arg(psi(1)) - std::arg(psi(0));
    phi = std::fmod(phi, 2 * pi);
    if (phi < 0) phi += 2 * pi;
    if (phi >= 2 * pi) phi -= 2 * pi;
    out.phi = phi;
    return out;
}

double wrap_angle(double x) {
    double y = std::remainder(x, 2 * pi);  // [-pi, pi]
    if (y <= -pi) y += 2 * pi;
    return y;
}

}  // namespace trajphase
