#include "trajphase/dephasing.hpp"

#include <cmath>

namespace trajphase {

LindbladModel dephasing_model(const DephasingParams& p) {
    return LindbladModel(OperatorSchedule(Operator(0.5 * p.omega * pauli(Axis::z))), std::vector<Operator>{pauli(Axis::z)}, p.lambda);
}

ShiftSet dephasing_shift(const DephasingParams& p) { return {ComplexSchedule(cd(p.f, 0.0))}; }

PureState dephasing_initial_state(const DephasingParams& p) { return state_from_bloch({p.theta0, p.phi0}); }

double gamma_nj_closed_form(const DephasingParams& p) {
    const double fl = p.f * p.lambda;
    const double c2 = std::pow(std::cos(p.theta0 / 2), 2);
    const double s2 = std::pow(std::sin(p.theta0 / 2), 2);
    if (std::abs(fl) < 1e-12 * p.omega) return -pi * (1.0 - std::cos(p.theta0));
    const double x = 4 * pi * fl / p.omega;
    // log-sum-exp keeps large |x| finite
    double log_term;
    if (c2 == 0.0) {
        log_term = -x;
    } else if (s2 == 0.0) {
        log_term = x;
    } else {
        const double a = x + std::log(c2);
        const double b = -x + std::log(s2);
        const double hi = std::max(a, b);
        log_term = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
    return -pi + p.omega / (4 * fl) * log_term;
}

double gamma_nj_small_correction(const DephasingParams& p) {
    const double s = std::sin(p.theta0);
    return 2 * pi * pi * (p.f * p.lambda / p.omega) * s * s;
}

BlochAngles bloch_spiral(const DephasingParams& p, double t) {
    BlochAngles out;
    // theta/2 = atan2(e^{-f lambda t} sin(theta0/2), e^{f lambda t} cos(theta0/2))
    const double e = std::exp(-p.f * p.lambda * t);
    out.theta = 2 * std::atan2(e * std::sin(p.theta0 / 2), std::cos(p.theta0 / 2) / e);
    double phi = std::fmod(p.phi0 + p.omega * t, 2 * pi);
    if (phi < 0) phi += 2 * pi;
    out.phi = phi;
    return out;
}

DecayEquivalent decay_equivalent_model(const DephasingParams& p) {
    DecayEquivalent out;
    out.lambda_prime = -p.f * p.lambda;
    const Operator sz = pauli(Axis::z);
    const Operator h = 0.5 * p.omega * sz;
    const Operator lminus = pauli(Axis::x) - I * pauli(Axis::y);
    // H~' = (omega/2) sigma_z - i lambda' (sigma_z + 1)
    out.no_jump.k_tilde = OperatorSchedule(Operator(h - 0.5 * I * out.lambda_prime * (lminus.adjoint() * lminus)));
    if (out.lambda_prime >= 0.0) {
        out.model.emplace(OperatorSchedule(h), std::vector<Operator>{lminus}, out.lambda_prime);
    } else {
        out.warning = "f > 0 requires a negative decay strength lambda' = " + std::to_string(out.lambda_prime) +
                      "; only the formal no-jump generator is available";
    }
    return out;
}

cd qsd_overlap_value(const DephasingParams& p, double T) {
    const double c2 = std::pow(std::cos(p.theta0 / 2), 2);
    const double s2 = std::pow(std::sin(p.theta0 / 2), 2);
    const cd rate = -I * (0.5 * p.omega + I * p.f * p.lambda) * T;  // eigenvalue on |0>
    return c2 * std::exp(rate) + s2 * std::exp(-rate);
}

double qsd_overlap_closed_form(const DephasingParams& p, double T) {
    if (T == 0.0) return 0.0;
    const int n = std::max(64, static_cast<int>(std::ceil(std::abs(p.omega * T) / 0.05)));
    cd prev = 1.0;
    double arg = 0.0;
    bool skipped = false;
    for (int k = 1; k <= n; ++k) {
        const cd z = qsd_overlap_value(p, T * k / n);
        if (std::abs(z) <= 1e-12) {
            skipped = true;
            continue;
        }
        double d = std::arg(z * std::conj(prev));
        if (skipped && d > pi / 2) d -= 2 * pi;
        skipped = false;
        arg += d;
        prev = z;
    }
    return arg;
}

double qsd_overlap_arctan(const DephasingParams& p, double T) {
    const double th = std::tanh(p.f * p.lambda * T);
    const double c = std::cos(p.theta0);
    return -std::atan((th + c) / (1 + th * c) * std::tan(0.5 * p.omega * T));
}

double dynamical_term_dephasing(const DephasingParams& p, double T) { return 0.5 * p.omega * T * std::cos(p.theta0); }

}  // namespace trajphase
