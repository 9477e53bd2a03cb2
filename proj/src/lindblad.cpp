#include "trajphase/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace trajphase {

namespace {

int schedule_dim(const OperatorSchedule& s) {
    const auto& v = s.values();
    const auto n = v.front().rows();
    for (const auto& m : v) {
        if (m.rows() != n || m.cols() != n) throw InvalidArgument("schedule operators must be square and share a dimension");
    }
    return static_cast<int>(n);
}

std::vector<OperatorSchedule> to_schedules(const std::vector<Operator>& ops) {
    std::vector<OperatorSchedule> out;
    out.reserve(ops.size());
    for (const auto& op : ops) out.emplace_back(op);
    return out;
}

}  // namespace

LindbladModel::LindbladModel(OperatorSchedule hamiltonian, std::vector<OperatorSchedule> lindblads, double lambda)
    : hamiltonian_(std::move(hamiltonian)), lindblads_(std::move(lindblads)), lambda_(lambda) {
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
        throw InvalidArgument("LindbladModel: lambda must be finite and >= 0");
    dim_ = schedule_dim(hamiltonian_);
    if (dim_ < 1) throw InvalidArgument("LindbladModel: empty Hamiltonian");
    for (const auto& l : lindblads_) {
        if (schedule_dim(l) != dim_) throw InvalidArgument("LindbladModel: Lindblad operator dimension mismatch");
    }
}

LindbladModel::LindbladModel(OperatorSchedule hamiltonian, const std::vector<Operator>& lindblads, double lambda)
    : LindbladModel(std::move(hamiltonian), to_schedules(lindblads), lambda) {}

bool LindbladModel::is_time_dependent() const {
    if (!hamiltonian_.is_constant()) return true;
    return std::any_of(lindblads_.begin(), lindblads_.end(), [](const auto& l) { return !l.is_constant(); });
}

std::vector<double> LindbladModel::grid_times() const {
    std::set<double> times{0.0};
    for (double t : hamiltonian_.grid_times()) times.insert(t);
    for (const auto& l : lindblads_)
        for (double t : l.grid_times()) times.insert(t);
    return {times.begin(), times.end()};
}

DensityMatrix density_from_state(const PureState& psi) {
    const double n2 = psi.squaredNorm();
    if (n2 == 0.0) throw InvalidArgument("density_from_state: zero vector");
    return psi * psi.adjoint() / n2;
}

DensityDiagnostics diagnose_density(const DensityMatrix& rho) {
    DensityDiagnostics d;
    d.hermiticity = max_abs(Operator(rho - rho.adjoint()));
    d.trace_error = std::abs(rho.trace() - 1.0);
    const Operator herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

void validate_density(const DensityMatrix& rho, double tol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) throw InvalidArgument("density matrix must be square");
    const auto d = diagnose_density(rho);
    std::ostringstream msg;
    if (d.hermiticity > tol) msg << "not Hermitian (" << d.hermiticity << ") ";
    if (d.trace_error > tol) msg << "trace off by " << d.trace_error << " ";
    if (d.min_eigenvalue < -tol) msg << "negative eigenvalue " << d.min_eigenvalue;
    if (!msg.str().empty()) throw InvalidArgument("invalid density matrix: " + msg.str());
}

Operator lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho, double t) {
    if (rho.rows() != model.dim() || rho.cols() != model.dim())
        throw InvalidArgument("lindblad_rhs: density matrix dimension mismatch");
    const Operator& h = model.hamiltonian().at(t);
    Operator out = -I * (h * rho - rho * h);
    if (model.lambda() == 0.0) return out;
    Operator diss = Operator::Zero(model.dim(), model.dim());
    for (const auto& ls : model.lindblads()) {
        const Operator& l = ls.at(t);
        const Operator ldl = l.adjoint() * l;
        diss += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    out += model.lambda() * diss;
    return out;
}

DensityTrajectory evolve_density(const LindbladModel& model, const DensityMatrix& rho0, double T, int steps) {
    if (steps < 1) throw InvalidArgument("evolve_density: steps must be >= 1");
    if (!(T >= 0.0)) throw InvalidArgument("evolve_density: T must be >= 0");
    if (rho0.rows() != model.dim()) throw InvalidArgument("evolve_density: dimension mismatch");
    validate_density(rho0);

    DensityTrajectory out;
    out.times.reserve(steps + 1);
    out.states.reserve(steps + 1);
    out.times.push_back(0.0);
    out.states.push_back(rho0);

    const double h = T / steps;
    DensityMatrix rho = rho0;
    long soft_negative = 0;
    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const Operator k1 = lindblad_rhs(model, rho, t);
        const Operator k2 = lindblad_rhs(model, rho + 0.5 * h * k1, t + 0.5 * h);
        const Operator k3 = lindblad_rhs(model, rho + 0.5 * h * k2, t + 0.5 * h);
        const Operator k4 = lindblad_rhs(model, rho + h * k3, t + h);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const auto d = diagnose_density(rho);
        if (d.hermiticity > 1e-10 || d.trace_error > 1e-10 || d.min_eigenvalue < -1e-6 ||
            !std::isfinite(d.trace_error)) {
            std::ostringstream msg;
            msg << "evolve_density: invariant violated at step " << s + 1 << " (t=" << t + h
                << "): hermiticity " << d.hermiticity << ", trace error " << d.trace_error
                << ", min eigenvalue " << d.min_eigenvalue;
            throw IntegrationError(msg.str(), s + 1);
        }
        if (d.min_eigenvalue < -1e-10) ++soft_negative;
        out.times.push_back((s + 1) * h);
        out.states.push_back(rho);
    }
    if (soft_negative > 0) {
        out.warnings.push_back("density matrix had eigenvalues below -1e-10 on " + std::to_string(soft_negative) +
                               " steps");
    }
    return out;
}

double density_convergence(const LindbladModel& model, const DensityMatrix& rho0, double T, int steps) {
    const auto coarse = evolve_density(model, rho0, T, steps);
    const auto fine = evolve_density(model, rho0, T, 2 * steps);
    return max_abs(Operator(coarse.final_state() - fine.final_state()));
}

void check_shift_count(const LindbladModel& model, const ShiftSet& shifts) {
    if (shifts.size() != model.channels()) {
        throw InvalidArgument("shift set has " + std::to_string(shifts.size()) + " entries but the model has " +
                              std::to_string(model.channels()) + " channels");
    }
}

OperatorSchedule shift_hamiltonian_term(const LindbladModel& model, const ShiftSet& shifts) {
    check_shift_count(model, shifts);
    const int d = model.dim();
    OperatorSchedule term(Operator(Operator::Zero(d, d)));
    const double lam = model.lambda();
    for (std::size_t m = 0; m < shifts.size(); ++m) {
        auto channel = zip_schedules(model.lindblads()[m], shifts[m], [lam](const Operator& l, const cd& f) {
            return Operator(-0.5 * I * lam * (std::conj(f) * l - f * l.adjoint()));
        });
        term = zip_schedules(term, channel, [](const Operator& a, const Operator& b) { return Operator(a + b); });
    }
    return term;
}

LindbladModel apply_shift(const LindbladModel& model, const ShiftSet& shifts) {
    const OperatorSchedule term = shift_hamiltonian_term(model, shifts);
    OperatorSchedule k = zip_schedules(model.hamiltonian(), term,
                                       [](const Operator& h, const Operator& dh) { return Operator(h + dh); });
    std::vector<OperatorSchedule> shifted;
    shifted.reserve(model.channels());
    const int d = model.dim();
    for (std::size_t m = 0; m < model.channels(); ++m) {
        shifted.push_back(zip_schedules(model.lindblads()[m], shifts[m], [d](const Operator& l, const cd& f) {
            return Operator(l - f * Operator::Identity(d, d));
        }));
    }
    return LindbladModel(std::move(k), std::move(shifted), model.lambda());
}

LindbladModel apply_unitary_mixing(const LindbladModel& model, const Eigen::MatrixXcd& v) {
    const auto n = static_cast<Eigen::Index>(model.channels());
    if (v.rows() != n || v.cols() != n) throw InvalidArgument("apply_unitary_mixing: V must be channels x channels");
    if (n > 0 && max_abs(Operator(v.adjoint() * v - Operator::Identity(n, n))) > 1e-10)
        throw InvalidArgument("apply_unitary_mixing: V is not unitary");
    const int d = model.dim();
    std::vector<OperatorSchedule> mixed;
    mixed.reserve(model.channels());
    for (Eigen::Index m = 0; m < n; ++m) {
        OperatorSchedule acc(Operator(Operator::Zero(d, d)));
        for (Eigen::Index k = 0; k < n; ++k) {
            const cd coeff = v(m, k);
            acc = zip_schedules(acc, model.lindblads()[k],
                                [coeff](const Operator& a, const Operator& l) { return Operator(a + coeff * l); });
        }
        mixed.push_back(std::move(acc));
    }
    return LindbladModel(model.hamiltonian(), std::move(mixed), model.lambda());
}

LindbladModel zero_point_shift(const LindbladModel& model, const RealSchedule& h) {
    const int d = model.dim();
    auto shifted = zip_schedules(model.hamiltonian(), h, [d](const Operator& ham, const double& e) {
        return Operator(ham - e * Operator::Identity(d, d));
    });
    return LindbladModel(std::move(shifted), model.lindblads(), model.lambda());
}

std::vector<bool> hidden_channels(const LindbladModel& model, const ShiftSet& shifts, double tol) {
    check_shift_count(model, shifts);
    std::vector<bool> out;
    out.reserve(shifts.size());
    for (std::size_t m = 0; m < shifts.size(); ++m) {
        const auto& l = model.lindblads()[m];
        const auto& f = shifts[m];
        std::set<double> times{0.0};
        for (double t : l.grid_times()) times.insert(t);
        for (double t : f.grid_times()) times.insert(t);
        // grid points plus one interior point per cell covers every cell value
        std::vector<double> probes(times.begin(), times.end());
        const std::size_t base = probes.size();
        for (std::size_t i = 0; i + 1 < base; ++i) probes.push_back(0.5 * (probes[i] + probes[i + 1]));
        bool hidden = true;
        for (double t : probes) {
            if (!l.covers(t, t) || !f.covers(t, t)) continue;
            if (!is_hermitian(Operator(std::conj(f.at(t)) * l.at(t)), tol)) {
                hidden = false;
                break;
            }
        }
        out.push_back(hidden);
    }
    return out;
}

bool shift_is_hidden(const LindbladModel& model, const ShiftSet& shifts, double tol) {
    const auto flags = hidden_channels(model, shifts, tol);
    return std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
}

std::optional<DensityMatrix> generator_witness(const LindbladModel& a, const LindbladModel& b, double t, double tol) {
    if (a.dim() != b.dim()) throw InvalidArgument("generator_witness: dimension mismatch");
    const int d = a.dim();
    std::vector<PureState> probes;
    for (int j = 0; j < d; ++j) probes.push_back(PureState::Unit(d, j));
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            for (cd phase : {cd(1, 0), cd(-1, 0), cd(0, 1), cd(0, -1)}) {
                PureState v = PureState::Zero(d);
                v(j) = 1.0;
                v(k) = phase;
                probes.push_back(v / std::sqrt(2.0));
            }
        }
    }
    for (const auto& psi : probes) {
        const DensityMatrix rho = density_from_state(psi);
        if (max_abs(Operator(lindblad_rhs(a, rho, t) - lindblad_rhs(b, rho, t))) > tol) return rho;
    }
    return std::nullopt;
}

}  // namespace trajphase
