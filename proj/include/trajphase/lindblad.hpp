#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trajphase/operators.hpp"

namespace trajphase {

using DensityMatrix = Operator;

/// One complex shift schedule f_m(t) per Lindblad channel. An empty set means
/// "no shift" wherever a ShiftSet is optional.
using ShiftSet = std::vector<ComplexSchedule>;

/// Lindblad generator -i[H(t), .] + lambda * sum_m D[L_m].
///
/// Lindblad operators are normally constant; they only become schedules after
/// a time-dependent shift.
class LindbladModel {
public:
    LindbladModel(OperatorSchedule hamiltonian, std::vector<OperatorSchedule> lindblads, double lambda);
    LindbladModel(OperatorSchedule hamiltonian, const std::vector<Operator>& lindblads, double lambda);

    int dim() const { return dim_; }
    std::size_t channels() const { return lindblads_.size(); }
    double lambda() const { return lambda_; }
    const OperatorSchedule& hamiltonian() const { return hamiltonian_; }
    const std::vector<OperatorSchedule>& lindblads() const { return lindblads_; }

    bool is_time_dependent() const;
    /// Every grid point of every schedule in the model, plus 0.
    std::vector<double> grid_times() const;

private:
    OperatorSchedule hamiltonian_;
    std::vector<OperatorSchedule> lindblads_;
    double lambda_;
    int dim_;
};

DensityMatrix density_from_state(const PureState& psi);

struct DensityDiagnostics {
    double hermiticity = 0.0;  // max |rho - rho^dag|
    double trace_error = 0.0;  // |tr rho - 1|
    double min_eigenvalue = 0.0;
};

DensityDiagnostics diagnose_density(const DensityMatrix& rho);

/// Throws InvalidArgument unless rho is Hermitian, unit-trace and positive
/// within `tol`.
void validate_density(const DensityMatrix& rho, double tol = 1e-10);

/// d rho / dt from the Lindblad equation at time t.
Operator lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho, double t);

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<std::string> warnings;

    const DensityMatrix& final_state() const { return states.back(); }
};

/// Fixed-step RK4 integration of the master equation over [0, T].
/// Every grid state is checked: Hermiticity and trace within 1e-10,
/// eigenvalues above -1e-6 (values between -1e-6 and -1e-10 produce a warning).
DensityTrajectory evolve_density(const LindbladModel& model, const DensityMatrix& rho0, double T,
                                 int steps = kDefaultSteps);

/// Max-entry change of rho(T) when the step count is doubled.
double density_convergence(const LindbladModel& model, const DensityMatrix& rho0, double T,
                           int steps = kDefaultSteps);

/// Hermitian correction K(t) - H(t) = -(i lambda/2) sum_m (f_m^* L_m - f_m L_m^dag).
OperatorSchedule shift_hamiltonian_term(const LindbladModel& model, const ShiftSet& shifts);

/// L_m -> L_m - f_m(t), H -> K(t).
LindbladModel apply_shift(const LindbladModel& model, const ShiftSet& shifts);

/// L_m -> sum_n V_mn L_n.
LindbladModel apply_unitary_mixing(const LindbladModel& model, const Eigen::MatrixXcd& v);

/// H(t) -> H(t) - h(t) 1.
LindbladModel zero_point_shift(const LindbladModel& model, const RealSchedule& h);

/// Whether f_m^*(t) L_m(t) is Hermitian for channel m on every grid time.
std::vector<bool> hidden_channels(const LindbladModel& model, const ShiftSet& shifts, double tol = 1e-12);

/// True when every channel is hidden, i.e. the shift leaves rho(t) untouched.
bool shift_is_hidden(const LindbladModel& model, const ShiftSet& shifts, double tol = 1e-12);

/// Searches qubit-style probe states (computational basis and pairwise
/// superpositions) for one on which the two generators differ by more than tol.
std::optional<DensityMatrix> generator_witness(const LindbladModel& a, const LindbladModel& b, double t,
                                               double tol = 1e-10);

/// Throws InvalidArgument when the shift set does not match the channel count.
void check_shift_count(const LindbladModel& model, const ShiftSet& shifts);

}  // namespace trajphase
