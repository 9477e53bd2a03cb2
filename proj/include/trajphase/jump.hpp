#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajphase/ensemble.hpp"
#include "trajphase/lindblad.hpp"

namespace trajphase {

/// Effective non-Hermitian generator of the no-jump evolution.
struct NoJumpGenerator {
    OperatorSchedule k_tilde;
};

/// H~(t) = H(t) - (i lambda / 2) sum_m L_m^dag L_m.
NoJumpGenerator no_jump_hamiltonian(const LindbladModel& model);

/// K~(t) = H~(t) + (K(t) - H(t)) + (i lambda / 2) sum_m (f_m L_m^dag + f_m^* L_m - |f_m|^2),
/// the no-jump generator of apply_shift(model, shifts). K - H vanishes for hidden shifts.
NoJumpGenerator shifted_no_jump_hamiltonian(const LindbladModel& model, const ShiftSet& shifts);

struct JumpEvent {
    double time = 0.0;
    int channel = 0;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<PureState> states;
    std::vector<JumpEvent> jumps;
    double survival = 1.0;  // final squared norm of the no-jump path
    std::vector<std::string> warnings;
};

/// States T exp(-i int_0^{t_k} K~ dt) psi0 on a uniform grid of `steps` cells.
/// Throws TotalDecayError if the norm underflows below 1e-150.
TrajectoryRecord propagate_no_jump(const NoJumpGenerator& gen, const PureState& psi0, double T,
                                   int steps = kDefaultSteps);

/// Final squared norm of a no-jump record.
double no_jump_probability(const TrajectoryRecord& rec);

struct GeometricPhaseResult {
    double overlap_arg = 0.0;     // continuously tracked arg <psi(0)|psi(T)>
    double dynamical_term = 0.0;  // int <psi|H|psi>/<psi|psi> dt
    double gamma = 0.0;           // overlap_arg + dynamical_term
    double final_norm = 0.0;      // ||psi(T)||
    int grid_steps = 0;
    double max_step_rotation = 0.0;      // largest per-step change of the tracked arg
    std::optional<double> zero_crossing;  // time at which <psi0|psi(t)> vanished
};

struct PhaseOptions {
    int steps = kDefaultSteps;
    int max_refinements = 6;  // step doublings allowed to get rotations below pi/2
    bool strict = false;      // throw BranchTrackingError on a zero crossing
};

/// Geometric phase of a sampled path: arg <psi_0|psi_N> tracked through the
/// grid plus the Simpson-integrated dynamical phase of `hamiltonian`.
///
/// If the overlap passes through zero (|<psi0|psi>| <= 1e-10 |psi0||psi|) the
/// sample is skipped, the crossing time is recorded, and the resulting
/// half-turn is counted clockwise.
GeometricPhaseResult path_geometric_phase(std::span<const double> times, std::span<const PureState> path,
                                          const std::function<Operator(double)>& hamiltonian);

/// No-jump geometric phase. With shifts, the path is generated by the shifted
/// K~ and the dynamical term uses the shifted Hermitian Hamiltonian K.
GeometricPhaseResult no_jump_geometric_phase(const LindbladModel& model, const ShiftSet& shifts,
                                             const PureState& psi0, double T, const PhaseOptions& opts = {});

/// Nonvanishing gauge factor c(t) with its time derivative.
struct GaugeFactor {
    std::function<cd(double)> value;
    std::function<cd(double)> derivative;
};

/// (gamma for (psi, H), gamma for (c psi, H + i d/dt ln(c/|c|))).
std::pair<GeometricPhaseResult, GeometricPhaseResult> gauge_transform_check(const LindbladModel& model,
                                                                            const ShiftSet& shifts,
                                                                            const PureState& psi0, double T,
                                                                            const GaugeFactor& c,
                                                                            const PhaseOptions& opts = {});

/// First-order quantum-jump trajectory with per-step renormalization. Jump
/// operators are L_m - f_m(t) when shifts are given.
TrajectoryRecord sample_jump_trajectory(const LindbladModel& model, const ShiftSet& shifts, const PureState& psi0,
                                        double T, double delta_t, RngStream& rng);

struct JumpEnsembleResult {
    std::vector<double> times;                    // checkpoint times
    std::vector<DensityMatrix> rho;               // mean projector per checkpoint
    std::vector<Eigen::MatrixXd> rho_std_error;   // per-entry standard error
    std::vector<int> jump_counts;                 // per trajectory
    std::vector<PureState> final_states;          // normalized, per trajectory
    double mean_jumps = 0.0;
    double jumps_std_error = 0.0;
    std::vector<std::string> warnings;
};

struct JumpEnsembleOptions {
    int checkpoints = 64;
    int threads = 0;  // 0: hardware concurrency (TRAJPHASE_THREADS caps it)
};

/// Averages normalized projectors over N jump trajectories; trajectory i draws
/// from derive_stream(seed, i).
JumpEnsembleResult average_jump_ensemble(const LindbladModel& model, const ShiftSet& shifts, const PureState& psi0,
                                         double T, double delta_t, int n, std::uint64_t seed,
                                         const JumpEnsembleOptions& opts = {});

struct KrausSet {
    double delta_t = 0.0;
    std::vector<Operator> ops;  // F_0, F_1, ...
};

/// F_0 = 1 - i K~(t) dt, F_m = sqrt(lambda dt) (L_m - f_m(t)); the E-set when
/// shifts are empty. With lambda = 0 only F_0 is returned.
KrausSet kraus_set(const LindbladModel& model, const ShiftSet& shifts, double delta_t, double t = 0.0);

/// max |sum_mu F_mu^dag F_mu - 1|.
double completeness_residual(const KrausSet& set);

DensityMatrix apply_kraus(const KrausSet& set, const DensityMatrix& rho);

/// The (M+1)x(M+1) matrix W with F_mu ~= sum_nu W_mu,nu E_nu.
Eigen::MatrixXcd kraus_connection_matrix(std::span<const cd> shifts_at_t, double lambda, double delta_t);

/// Shift values f_m(t) of a shift set.
std::vector<cd> shifts_at(const ShiftSet& shifts, double t);

/// max |sum F rho F^dag - sum E rho E^dag|. Refuses (InvalidArgument) when the
/// shift is not hidden, since the two maps then genuinely differ.
double kraus_maps_equal(const LindbladModel& model, const ShiftSet& shifts, double delta_t, const DensityMatrix& rho,
                        double t = 0.0);

}  // namespace trajphase
