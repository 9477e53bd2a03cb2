#pragma once

#include <optional>
#include <string>

#include "trajphase/jump.hpp"
#include "trajphase/lindblad.hpp"

namespace trajphase {

/// Qubit precessing about z (H = omega/2 sigma_z) under dephasing L = sigma_z,
/// with a real hidden shift f of the Lindblad operator.
struct DephasingParams {
    double omega = 1.0;
    double lambda = 0.0;
    double f = 0.0;
    double theta0 = pi / 2;
    double phi0 = 0.0;

    double period() const { return 2 * pi / omega; }
};

LindbladModel dephasing_model(const DephasingParams& p);
ShiftSet dephasing_shift(const DephasingParams& p);
PureState dephasing_initial_state(const DephasingParams& p);

/// No-jump geometric phase over one precession period:
/// -pi + omega/(4 f lambda) ln(e^{4 pi f lambda/omega} cos^2(theta0/2) + e^{-4 pi f lambda/omega} sin^2(theta0/2)),
/// and -pi (1 - cos theta0) once |f lambda| < 1e-12 omega.
double gamma_nj_closed_form(const DephasingParams& p);

/// Leading correction 2 pi^2 (f lambda / omega) sin^2 theta0 to the closed-system phase.
double gamma_nj_small_correction(const DephasingParams& p);

/// tan(theta(t)/2) = e^{-2 f lambda t} tan(theta0/2), phi(t) = phi0 + omega t.
BlochAngles bloch_spiral(const DephasingParams& p, double t);

/// Decay model (L- = sigma_x - i sigma_y, lambda' = -f lambda) whose no-jump ray
/// follows the shifted dephasing one. lambda' < 0 (f > 0) has no Lindblad model;
/// only the formal generator is returned then, with a warning.
struct DecayEquivalent {
    double lambda_prime = 0.0;
    NoJumpGenerator no_jump;
    std::optional<LindbladModel> model;
    std::optional<std::string> warning;
};

DecayEquivalent decay_equivalent_model(const DephasingParams& p);

/// <phi0| exp[-i (omega/2 + i f lambda) T sigma_z] |phi0>.
cd qsd_overlap_value(const DephasingParams& p, double T);

/// arg of qsd_overlap_value, continued in T from arg = 0 at T = 0.
double qsd_overlap_closed_form(const DephasingParams& p, double T);

/// The printed form -arctan[(tanh(f lambda T) + cos theta0)/(1 + tanh(f lambda T) cos theta0) tan(omega T / 2)].
/// Principal branch only; agrees with qsd_overlap_closed_form for omega T < pi.
double qsd_overlap_arctan(const DephasingParams& p, double T);

/// int_0^T tr[rho(t) H] dt = (omega T / 2) cos theta0 (populations are constant).
double dynamical_term_dephasing(const DephasingParams& p, double T);

}  // namespace trajphase
