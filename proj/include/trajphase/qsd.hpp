#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trajphase/ensemble.hpp"
#include "trajphase/lindblad.hpp"

namespace trajphase {

struct QSDConfig {
    double delta_t = 1e-3;
    int n_trajectories = 10000;
    std::uint64_t seed = 1;
    double T = 1.0;
    int checkpoints = 64;  // arg of the ensemble mean is unwrapped across these
    int threads = 0;       // 0: hardware concurrency (TRAJPHASE_THREADS caps it)
};

/// dw_m = sqrt(dt/2) (xi_1 + i xi_2), xi standard normal; E[dw dw*] = dt, E[dw dw] = 0.
std::vector<cd> wiener_increments(int channels, double delta_t, RngStream& rng);

/// One Euler-Maruyama step of the linear QSD equation
/// dphi = [-i H dt - (lambda/2) sum L^dag L dt + sqrt(lambda) sum L dw] phi.
/// Shifted L_m - f_m(t) and K(t) replace L_m and H when shifts are given.
PureState qsd_step(const LindbladModel& model, const ShiftSet& shifts, const PureState& phi, double t,
                   double delta_t, std::span<const cd> dw);

struct OverlapEstimate {
    cd mean_overlap;           // E[<phi0|phi(T)>]
    double std_error = 0.0;    // standard error of mean_overlap (complex modulus)
    double overlap_arg = 0.0;  // arg of the mean, unwrapped over checkpoints
    double arg_std_error = 0.0;
    std::vector<double> checkpoint_times;
    std::vector<cd> checkpoint_means;
    DensityMatrix rho_estimate;     // sum |phi><phi| / sum <phi|phi> at T
    Eigen::MatrixXd rho_std_error;  // delta-method standard error per entry
    int n_used = 0;
    int n_excluded = 0;  // trajectories whose norm exceeded 1e100
    int steps = 0;
    std::vector<std::string> warnings;
};

/// Monte Carlo estimate of E[<phi0|phi(T)>] over cfg.n_trajectories linear
/// QSD trajectories. Trajectory i draws from derive_stream(cfg.seed, i).
OverlapEstimate averaged_overlap(const LindbladModel& model, const ShiftSet& shifts, const PureState& phi0,
                                 const QSDConfig& cfg);

struct QSDEnsembleResult {
    cd mean_overlap;
    double std_error = 0.0;
    double overlap_arg = 0.0;
    double arg_std_error = 0.0;
    double alpha_g = 0.0;         // overlap_arg + dynamical_term
    double dynamical_term = 0.0;  // int tr[rho(t) K(t)] dt from the master equation
    int n_used = 0;
    int n_excluded = 0;
    DensityMatrix rho_estimate;
    Eigen::MatrixXd rho_std_error;
    std::vector<std::string> warnings;
};

/// Averaged geometric phase alpha_g. The dynamical term integrates the exact
/// master-equation rho(t) against the (shifted) Hermitian Hamiltonian.
QSDEnsembleResult averaged_geometric_phase(const LindbladModel& model, const ShiftSet& shifts,
                                           const PureState& phi0, const QSDConfig& cfg,
                                           int density_steps = kDefaultSteps);

/// int_0^T tr[rho(t) H(t)] dt over a master-equation solution (Simpson).
double density_dynamical_term(const LindbladModel& model, const DensityMatrix& rho0, double T,
                              int steps = kDefaultSteps);

}  // namespace trajphase
