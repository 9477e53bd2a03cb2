#include "trajphase/jump.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trajphase/quadrature.hpp"

namespace trajphase {

namespace {

constexpr double kUnderflowNorm = 1e-150;
constexpr double kZeroOverlap = 1e-10;

OperatorSchedule anti_hermitian_loss(const LindbladModel& model) {
    const int d = model.dim();
    const double lam = model.lambda();
    OperatorSchedule acc(Operator(Operator::Zero(d, d)));
    for (const auto& l : model.lindblads()) {
        acc = zip_schedules(acc, l, [lam](const Operator& a, const Operator& lm) {
            return Operator(a - 0.5 * I * lam * (lm.adjoint() * lm));
        });
    }
    return acc;
}

/// Jump operators L_m - f_m(t) (or L_m without shifts).
std::vector<OperatorSchedule> jump_operators(const LindbladModel& model, const ShiftSet& shifts) {
    if (shifts.empty()) return model.lindblads();
    return apply_shift(model, shifts).lindblads();
}

NoJumpGenerator generator_for(const LindbladModel& model, const ShiftSet& shifts) {
    return shifts.empty() ? no_jump_hamiltonian(model) : shifted_no_jump_hamiltonian(model, shifts);
}

std::vector<int> checkpoint_steps(int n_steps, int checkpoints) {
    checkpoints = std::max(1, checkpoints);
    std::vector<int> out;
    for (int j = 0; j <= checkpoints; ++j) {
        const int k = static_cast<int>(std::llround(static_cast<double>(j) * n_steps / checkpoints));
        if (out.empty() || out.back() != k) out.push_back(k);
    }
    return out;
}

int step_count(double T, double delta_t, std::vector<std::string>& warnings) {
    if (!(delta_t > 0.0)) throw InvalidArgument("delta_t must be positive");
    if (!(T > 0.0)) throw InvalidArgument("T must be positive");
    const auto n = std::llround(T / delta_t);
    if (n < 1) throw InvalidArgument("T must be at least one delta_t");
    if (std::abs(static_cast<double>(n) * delta_t - T) > 1e-9 * T) {
        std::ostringstream msg;
        msg << "T/delta_t = " << T / delta_t << " is not integral; using " << n << " steps of " << T / n;
        warnings.push_back(msg.str());
    }
    return static_cast<int>(n);
}

/// Precomputed pieces of a first-order jump trajectory.
class JumpStepper {
public:
    JumpStepper(const LindbladModel& model, const ShiftSet& shifts, double T, double delta_t,
                std::vector<std::string>& warnings)
        : lambda_(model.lambda()), jumps_(jump_operators(model, shifts)), gen_(generator_for(model, shifts)) {
        n_steps_ = step_count(T, delta_t, warnings);
        h_ = T / n_steps_;
        if (lambda_ * h_ > 0.1) {
            warnings.push_back("lambda * delta_t = " + std::to_string(lambda_ * h_) +
                               " exceeds 0.1; first-order jump statistics are inaccurate");
        }
        if (gen_.k_tilde.is_constant()) u0_ = expm(Operator(-I * h_ * gen_.k_tilde.values().front()));
        const int d = model.dim();
        probs_.resize(jumps_.size());
        buf_.resize(d);
        jumped_.resize(d);
    }

    int n_steps() const { return n_steps_; }
    double h() const { return h_; }

    /// Advances psi (normalized) over step s; returns the jump channel or -1.
    int step(PureState& psi, int s, RngStream& rng) {
        const double t = s * h_;
        double total = 0.0;
        int best = -1;
        if (lambda_ > 0.0) {
            for (std::size_t m = 0; m < jumps_.size(); ++m) {
                buf_.noalias() = jumps_[m].at(t) * psi;
                probs_[m] = lambda_ * h_ * buf_.squaredNorm();
                total += probs_[m];
            }
            if (total > 1.0) {
                throw StepSizeError("jump probability " + std::to_string(total) + " exceeds 1 at step " +
                                        std::to_string(s) + "; reduce delta_t",
                                    s);
            }
            const double u = uniform_(rng);
            if (u < total) {
                double acc = 0.0;
                best = static_cast<int>(jumps_.size()) - 1;
                for (std::size_t m = 0; m < jumps_.size(); ++m) {
                    acc += probs_[m];
                    if (u < acc) {
                        best = static_cast<int>(m);
                        break;
                    }
                }
                jumped_.noalias() = jumps_[best].at(t) * psi;
                psi = jumped_ / jumped_.norm();
                return best;
            }
        }
        if (gen_.k_tilde.is_constant()) {
            buf_.noalias() = u0_ * psi;
        } else {
            buf_.noalias() = expm(Operator(-I * h_ * gen_.k_tilde.at(t + 0.5 * h_))) * psi;
        }
        const double norm = buf_.norm();
        if (!(norm > kUnderflowNorm)) throw TotalDecayError("jump trajectory norm underflow", s);
        psi = buf_ / norm;
        return best;
    }

private:
    double lambda_;
    std::vector<OperatorSchedule> jumps_;
    NoJumpGenerator gen_;
    int n_steps_ = 0;
    double h_ = 0.0;
    Operator u0_;
    std::vector<double> probs_;
    PureState buf_;
    PureState jumped_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace

NoJumpGenerator no_jump_hamiltonian(const LindbladModel& model) {
    auto k = zip_schedules(model.hamiltonian(), anti_hermitian_loss(model),
                           [](const Operator& h, const Operator& loss) { return Operator(h + loss); });
    return {std::move(k)};
}

NoJumpGenerator shifted_no_jump_hamiltonian(const LindbladModel& model, const ShiftSet& shifts) {
    check_shift_count(model, shifts);
    // K - H vanishes for hidden shifts; kept so K~ generates the shifted model's no-jump path
    auto k = zip_schedules(no_jump_hamiltonian(model).k_tilde, shift_hamiltonian_term(model, shifts),
                           [](const Operator& a, const Operator& b) { return Operator(a + b); });
    const int d = model.dim();
    const double lam = model.lambda();
    for (std::size_t m = 0; m < shifts.size(); ++m) {
        auto term = zip_schedules(model.lindblads()[m], shifts[m], [d, lam](const Operator& l, const cd& f) {
            return Operator(0.5 * I * lam *
                            (f * l.adjoint() + std::conj(f) * l - std::norm(f) * Operator::Identity(d, d)));
        });
        k = zip_schedules(k, term, [](const Operator& a, const Operator& b) { return Operator(a + b); });
    }
    return {std::move(k)};
}

TrajectoryRecord propagate_no_jump(const NoJumpGenerator& gen, const PureState& psi0, double T, int steps) {
    if (steps < 1) throw InvalidArgument("propagate_no_jump: steps must be >= 1");
    if (!(T >= 0.0)) throw InvalidArgument("propagate_no_jump: T must be >= 0");
    if (psi0.size() != gen.k_tilde.values().front().rows())
        throw InvalidArgument("propagate_no_jump: state dimension mismatch");
    if (!(psi0.norm() > 0.0)) throw InvalidArgument("propagate_no_jump: initial state has zero norm");
    if (!gen.k_tilde.covers(0.0, T)) throw DomainError("propagate_no_jump: generator does not cover [0, T]");

    TrajectoryRecord rec;
    rec.times.reserve(steps + 1);
    rec.states.reserve(steps + 1);
    rec.times.push_back(0.0);
    rec.states.push_back(psi0);

    const double h = T / steps;
    Operator step_op;
    if (gen.k_tilde.is_constant()) step_op = expm(Operator(-I * h * gen.k_tilde.values().front()));
    PureState psi = psi0;
    for (int s = 0; s < steps; ++s) {
        if (gen.k_tilde.is_constant()) {
            psi = step_op * psi;
        } else {
            psi = expm(Operator(-I * h * gen.k_tilde.at((s + 0.5) * h))) * psi;
        }
        const double norm = psi.norm();
        if (!(norm >= kUnderflowNorm)) {
            throw TotalDecayError("no-jump state norm fell below 1e-150 at t=" + std::to_string((s + 1) * h), s + 1);
        }
        rec.times.push_back((s + 1) * h);
        rec.states.push_back(psi);
    }
    rec.survival = psi.squaredNorm() / psi0.squaredNorm();
    return rec;
}

double no_jump_probability(const TrajectoryRecord& rec) {
    if (!rec.jumps.empty()) throw InvalidArgument("no_jump_probability: record contains jumps");
    return rec.states.back().squaredNorm() / rec.states.front().squaredNorm();
}

GeometricPhaseResult path_geometric_phase(std::span<const double> times, std::span<const PureState> path,
                                          const std::function<Operator(double)>& hamiltonian) {
    if (times.size() != path.size() || path.size() < 2)
        throw InvalidArgument("path_geometric_phase: need matching times and at least two states");
    const PureState& psi0 = path.front();
    const double norm0 = psi0.norm();

    GeometricPhaseResult res;
    res.grid_steps = static_cast<int>(path.size()) - 1;

    cd prev = psi0.squaredNorm();
    bool skipped = false;
    double arg = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const cd z = psi0.dot(path[k]);  // conjugates psi0
        if (std::abs(z) <= kZeroOverlap * norm0 * path[k].norm()) {
            if (!res.zero_crossing) res.zero_crossing = times[k];
            skipped = true;
            continue;
        }
        double d = std::arg(z * std::conj(prev));
        if (skipped) {
            // half-turn through the origin: direction is undetermined, count it clockwise
            if (d > pi / 2) d -= 2 * pi;
            skipped = false;
        } else {
            res.max_step_rotation = std::max(res.max_step_rotation, std::abs(d));
        }
        arg += d;
        prev = z;
    }
    res.overlap_arg = arg;

    std::vector<double> integrand(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        const PureState& psi = path[k];
        integrand[k] = psi.dot(hamiltonian(times[k]) * psi).real() / psi.squaredNorm();
    }
    const double h = (times.back() - times.front()) / static_cast<double>(res.grid_steps);
    res.dynamical_term = simpson(integrand, h);
    res.gamma = res.overlap_arg + res.dynamical_term;
    res.final_norm = path.back().norm();
    return res;
}

GeometricPhaseResult no_jump_geometric_phase(const LindbladModel& model, const ShiftSet& shifts,
                                             const PureState& psi0, double T, const PhaseOptions& opts) {
    if (std::abs(psi0.norm() - 1.0) > 1e-12) throw InvalidArgument("no_jump_geometric_phase: psi0 must be normalized");
    if (!(T > 0.0)) throw InvalidArgument("no_jump_geometric_phase: T must be positive");
    const NoJumpGenerator gen = generator_for(model, shifts);
    const OperatorSchedule herm = shifts.empty() ? model.hamiltonian() : apply_shift(model, shifts).hamiltonian();
    auto ham = [&herm](double t) { return herm.at(t); };

    int steps = opts.steps;
    GeometricPhaseResult res;
    for (int r = 0;; ++r) {
        const auto rec = propagate_no_jump(gen, psi0, T, steps);
        res = path_geometric_phase(rec.times, rec.states, ham);
        if (res.max_step_rotation < pi / 2 || r >= opts.max_refinements) break;
        steps *= 2;
    }
    if (res.zero_crossing && opts.strict) {
        throw BranchTrackingError("overlap <psi0|psi(t)> vanishes at t=" + std::to_string(*res.zero_crossing),
                                  *res.zero_crossing);
    }
    return res;
}

std::pair<GeometricPhaseResult, GeometricPhaseResult> gauge_transform_check(const LindbladModel& model,
                                                                            const ShiftSet& shifts,
                                                                            const PureState& psi0, double T,
                                                                            const GaugeFactor& c,
                                                                            const PhaseOptions& opts) {
    const NoJumpGenerator gen = generator_for(model, shifts);
    const OperatorSchedule herm = shifts.empty() ? model.hamiltonian() : apply_shift(model, shifts).hamiltonian();
    const auto rec = propagate_no_jump(gen, psi0, T, opts.steps);

    std::vector<PureState> transformed;
    transformed.reserve(rec.states.size());
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        const cd ck = c.value(rec.times[k]);
        if (std::abs(ck) == 0.0) throw InvalidArgument("gauge_transform_check: c(t) vanishes on the grid");
        transformed.push_back(ck * rec.states[k]);
    }
    const int d = model.dim();
    auto ham = [&herm](double t) { return herm.at(t); };
    // i d/dt ln(c/|c|) = -Im(c'/c)
    auto ham_gauged = [&herm, &c, d](double t) {
        const double rate = (c.derivative(t) / c.value(t)).imag();
        return Operator(herm.at(t) - rate * Operator::Identity(d, d));
    };
    return {path_geometric_phase(rec.times, rec.states, ham),
            path_geometric_phase(rec.times, transformed, ham_gauged)};
}

TrajectoryRecord sample_jump_trajectory(const LindbladModel& model, const ShiftSet& shifts, const PureState& psi0,
                                        double T, double delta_t, RngStream& rng) {
    if (!shifts.empty()) check_shift_count(model, shifts);
    if (psi0.size() != model.dim()) throw InvalidArgument("sample_jump_trajectory: state dimension mismatch");
    if (!(psi0.norm() > 0.0)) throw InvalidArgument("sample_jump_trajectory: zero initial state");
    TrajectoryRecord rec;
    JumpStepper stepper(model, shifts, T, delta_t, rec.warnings);
    PureState psi = psi0 / psi0.norm();
    rec.times.reserve(stepper.n_steps() + 1);
    rec.states.reserve(stepper.n_steps() + 1);
    rec.times.push_back(0.0);
    rec.states.push_back(psi);
    for (int s = 0; s < stepper.n_steps(); ++s) {
        const int channel = stepper.step(psi, s, rng);
        const double t = (s + 1) * stepper.h();
        if (channel >= 0) rec.jumps.push_back({t, channel});
        rec.times.push_back(t);
        rec.states.push_back(psi);
    }
    rec.survival = 1.0;
    return rec;
}

namespace {

struct JumpChunk {
    std::vector<Operator> sum;
    std::vector<Eigen::MatrixXd> sum_sq;
};

}  // namespace

JumpEnsembleResult average_jump_ensemble(const LindbladModel& model, const ShiftSet& shifts, const PureState& psi0,
                                         double T, double delta_t, int n, std::uint64_t seed,
                                         const JumpEnsembleOptions& opts) {
    if (n < 1) throw InvalidArgument("average_jump_ensemble: N must be >= 1");
    if (!shifts.empty()) check_shift_count(model, shifts);
    if (psi0.size() != model.dim()) throw InvalidArgument("average_jump_ensemble: state dimension mismatch");

    JumpEnsembleResult out;
    // validates the step size once and collects warnings
    const JumpStepper probe(model, shifts, T, delta_t, out.warnings);
    const auto marks = checkpoint_steps(probe.n_steps(), opts.checkpoints);
    for (int k : marks) out.times.push_back(k * probe.h());

    const int d = model.dim();
    const PureState start = psi0 / psi0.norm();
    out.jump_counts.assign(n, 0);
    out.final_states.assign(n, start);

    JumpChunk proto;
    proto.sum.assign(marks.size(), Operator::Zero(d, d));
    proto.sum_sq.assign(marks.size(), Eigen::MatrixXd::Zero(d, d));

    auto chunks = run_chunked(
        static_cast<std::size_t>(n), 256, resolve_thread_count(opts.threads), proto,
        [&](std::size_t begin, std::size_t end, JumpChunk& acc) {
            std::vector<std::string> scratch;
            JumpStepper stepper(model, shifts, T, delta_t, scratch);
            for (std::size_t i = begin; i < end; ++i) {
                RngStream rng = derive_stream(seed, i);
                PureState psi = start;
                std::size_t next_mark = 0;
                int jumps = 0;
                auto record = [&]() {
                    const Operator proj = psi * psi.adjoint();
                    acc.sum[next_mark] += proj;
                    acc.sum_sq[next_mark] += proj.cwiseAbs2();
                    ++next_mark;
                };
                record();
                for (int s = 0; s < stepper.n_steps(); ++s) {
                    if (stepper.step(psi, s, rng) >= 0) ++jumps;
                    if (next_mark < marks.size() && marks[next_mark] == s + 1) record();
                }
                out.jump_counts[i] = jumps;
                out.final_states[i] = psi;
            }
        });

    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < marks.size(); ++j) {
        Operator sum = Operator::Zero(d, d);
        Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
        for (const auto& c : chunks) {
            sum += c.sum[j];
            sum_sq += c.sum_sq[j];
        }
        const Operator mean = sum / nn;
        Eigen::MatrixXd se = Eigen::MatrixXd::Zero(d, d);
        if (n > 1) {
            const Eigen::MatrixXd var = ((sum_sq - nn * mean.cwiseAbs2()) / (nn - 1.0)).cwiseMax(0.0);
            se = (var / nn).cwiseSqrt();
        }
        out.rho.push_back(mean);
        out.rho_std_error.push_back(se);
    }

    CompensatedSum<double> js;
    CompensatedSum<double> js2;
    for (int c : out.jump_counts) {
        js.add(c);
        js2.add(static_cast<double>(c) * c);
    }
    out.mean_jumps = js.value() / nn;
    if (n > 1) {
        const double var = std::max(0.0, (js2.value() - nn * out.mean_jumps * out.mean_jumps) / (nn - 1.0));
        out.jumps_std_error = std::sqrt(var / nn);
    }
    return out;
}

KrausSet kraus_set(const LindbladModel& model, const ShiftSet& shifts, double delta_t, double t) {
    if (!(delta_t > 0.0)) throw InvalidArgument("kraus_set: delta_t must be positive");
    if (!shifts.empty()) check_shift_count(model, shifts);
    const int d = model.dim();
    KrausSet set;
    set.delta_t = delta_t;
    const NoJumpGenerator gen = generator_for(model, shifts);
    set.ops.push_back(Operator::Identity(d, d) - I * delta_t * gen.k_tilde.at(t));
    if (model.lambda() > 0.0) {
        const double amp = std::sqrt(model.lambda() * delta_t);
        for (const auto& j : jump_operators(model, shifts)) set.ops.push_back(amp * j.at(t));
    }
    return set;
}

double completeness_residual(const KrausSet& set) {
    const auto d = set.ops.front().rows();
    Operator acc = -Operator::Identity(d, d);
    for (const auto& f : set.ops) acc += f.adjoint() * f;
    return max_abs(acc);
}

DensityMatrix apply_kraus(const KrausSet& set, const DensityMatrix& rho) {
    DensityMatrix out = DensityMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& f : set.ops) out += f * rho * f.adjoint();
    return out;
}

std::vector<cd> shifts_at(const ShiftSet& shifts, double t) {
    std::vector<cd> out;
    out.reserve(shifts.size());
    for (const auto& f : shifts) out.push_back(f.at(t));
    return out;
}

Eigen::MatrixXcd kraus_connection_matrix(std::span<const cd> shifts_at_t, double lambda, double delta_t) {
    if (!(delta_t > 0.0)) throw InvalidArgument("kraus_connection_matrix: delta_t must be positive");
    const auto m = static_cast<Eigen::Index>(shifts_at_t.size());
    const double amp = std::sqrt(lambda * delta_t);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(m + 1, m + 1);
    double sum_sq = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const cd f = shifts_at_t[static_cast<std::size_t>(k)];
        sum_sq += std::norm(f);
        w(0, k + 1) = amp * std::conj(f);
        w(k + 1, 0) = -amp * f;
    }
    w(0, 0) = 1.0 - 0.5 * lambda * delta_t * sum_sq;
    return w;
}

double kraus_maps_equal(const LindbladModel& model, const ShiftSet& shifts, double delta_t, const DensityMatrix& rho,
                        double t) {
    if (!shifts.empty() && !shift_is_hidden(model, shifts)) {
        throw InvalidArgument(
            "kraus_maps_equal: some f_m^* L_m is not Hermitian, so the shifted Kraus map describes a different "
            "evolution");
    }
    const auto e = kraus_set(model, {}, delta_t, t);
    const auto f = kraus_set(model, shifts, delta_t, t);
    return max_abs(Operator(apply_kraus(f, rho) - apply_kraus(e, rho)));
}

}  // namespace trajphase
