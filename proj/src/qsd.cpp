#include "trajphase/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trajphase/quadrature.hpp"

namespace trajphase {

namespace {

constexpr double kOverflowNorm = 1e100;

LindbladModel effective_model(const LindbladModel& model, const ShiftSet& shifts) {
    return shifts.empty() ? model : apply_shift(model, shifts);
}

/// Drift generator -i H - (lambda/2) sum L^dag L as a schedule.
OperatorSchedule drift_generator(const LindbladModel& m) {
    const double lam = m.lambda();
    OperatorSchedule acc = m.hamiltonian().map([](const Operator& h) { return Operator(-I * h); });
    for (const auto& l : m.lindblads()) {
        acc = zip_schedules(acc, l, [lam](const Operator& a, const Operator& lm) {
            return Operator(a - 0.5 * lam * (lm.adjoint() * lm));
        });
    }
    return acc;
}

struct QsdChunk {
    std::vector<CompensatedSum<cd>> checkpoint_sum;
    CompensatedSum<double> final_abs2;
    Operator rho_num;            // sum |phi><phi|
    Eigen::MatrixXd rho_num_sq;  // sum |a_i|^2 per entry
    Operator rho_cross;          // sum a_i b_i
    CompensatedSum<double> weight;
    CompensatedSum<double> weight_sq;
    int used = 0;
    int excluded = 0;
};

}  // namespace

std::vector<cd> wiener_increments(int channels, double delta_t, RngStream& rng) {
    if (!(delta_t > 0.0)) throw InvalidArgument("wiener_increments: delta_t must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(0.5 * delta_t);
    std::vector<cd> dw(static_cast<std::size_t>(channels));
    for (auto& w : dw) {
        const double re = normal(rng);
        const double im = normal(rng);
        w = scale * cd(re, im);
    }
    return dw;
}

PureState qsd_step(const LindbladModel& model, const ShiftSet& shifts, const PureState& phi, double t,
                   double delta_t, std::span<const cd> dw) {
    if (phi.size() != model.dim()) throw InvalidArgument("qsd_step: state dimension mismatch");
    if (dw.size() != model.channels()) throw InvalidArgument("qsd_step: one increment per channel required");
    const LindbladModel m = effective_model(model, shifts);
    const Operator& h = m.hamiltonian().at(t);
    const double sq = std::sqrt(m.lambda());
    Operator gen = -I * delta_t * h;
    for (std::size_t k = 0; k < m.channels(); ++k) {
        const Operator& l = m.lindblads()[k].at(t);
        gen += -0.5 * m.lambda() * delta_t * (l.adjoint() * l) + sq * dw[k] * l;
    }
    return phi + gen * phi;
}

OverlapEstimate averaged_overlap(const LindbladModel& model, const ShiftSet& shifts, const PureState& phi0,
                                 const QSDConfig& cfg) {
    if (std::abs(phi0.norm() - 1.0) > 1e-12) throw InvalidArgument("averaged_overlap: phi0 must be normalized");
    if (phi0.size() != model.dim()) throw InvalidArgument("averaged_overlap: state dimension mismatch");
    if (cfg.n_trajectories < 1) throw InvalidArgument("averaged_overlap: need at least one trajectory");
    if (!(cfg.delta_t > 0.0)) throw InvalidArgument("averaged_overlap: delta_t must be positive");
    if (!(cfg.T >= cfg.delta_t)) throw InvalidArgument("averaged_overlap: T must be >= delta_t");
    if (!shifts.empty()) check_shift_count(model, shifts);

    OverlapEstimate out;
    const auto n_steps = static_cast<int>(std::llround(cfg.T / cfg.delta_t));
    if (std::abs(n_steps * cfg.delta_t - cfg.T) > 1e-9 * cfg.T) {
        std::ostringstream msg;
        msg << "T/delta_t = " << cfg.T / cfg.delta_t << " is not integral; using " << n_steps << " steps of "
            << cfg.T / n_steps;
        out.warnings.push_back(msg.str());
    }
    const double h = cfg.T / n_steps;
    out.steps = n_steps;

    std::vector<int> marks;
    const int n_marks = std::max(1, cfg.checkpoints);
    for (int j = 0; j <= n_marks; ++j) {
        const int k = static_cast<int>(std::llround(static_cast<double>(j) * n_steps / n_marks));
        if (marks.empty() || marks.back() != k) marks.push_back(k);
    }
    for (int k : marks) out.checkpoint_times.push_back(k * h);

    const LindbladModel eff = effective_model(model, shifts);
    const OperatorSchedule drift = drift_generator(eff);
    const bool constant = !eff.is_time_dependent();
    const int d = eff.dim();
    const auto channels = static_cast<int>(eff.channels());
    const double sq = std::sqrt(eff.lambda());

    QsdChunk proto;
    proto.checkpoint_sum.resize(marks.size());
    proto.rho_num = Operator::Zero(d, d);
    proto.rho_num_sq = Eigen::MatrixXd::Zero(d, d);
    proto.rho_cross = Operator::Zero(d, d);

    auto chunks = run_chunked(
        static_cast<std::size_t>(cfg.n_trajectories), 256, resolve_thread_count(cfg.threads), proto,
        [&](std::size_t begin, std::size_t end, QsdChunk& acc) {
            std::normal_distribution<double> normal(0.0, 1.0);
            const double scale = std::sqrt(0.5 * h);
            Operator base = Operator::Identity(d, d) + h * drift.values().front();
            std::vector<Operator> noise_ops;
            for (const auto& l : eff.lindblads()) noise_ops.push_back(sq * l.values().front());
            Operator step_op(d, d);
            PureState phi(d);
            PureState next(d);
            std::vector<cd> overlaps(marks.size());

            for (std::size_t i = begin; i < end; ++i) {
                RngStream rng = derive_stream(cfg.seed, i);
                phi = phi0;
                std::size_t mark = 0;
                overlaps[mark++] = phi0.dot(phi);
                bool overflow = false;
                for (int s = 0; s < n_steps; ++s) {
                    if (!constant) {
                        const double t = s * h;
                        base = Operator::Identity(d, d) + h * drift.at(t);
                        for (int c = 0; c < channels; ++c) noise_ops[c] = sq * eff.lindblads()[c].at(t);
                    }
                    step_op = base;
                    for (int c = 0; c < channels; ++c) {
                        const double re = normal(rng);
                        const double im = normal(rng);
                        step_op += (scale * cd(re, im)) * noise_ops[c];
                    }
                    next.noalias() = step_op * phi;
                    phi.swap(next);
                    if (mark < marks.size() && marks[mark] == s + 1) {
                        if (!(phi.squaredNorm() < kOverflowNorm * kOverflowNorm)) {
                            overflow = true;
                            break;
                        }
                        overlaps[mark++] = phi0.dot(phi);
                    }
                }
                if (overflow) {
                    ++acc.excluded;
                    continue;
                }
                ++acc.used;
                for (std::size_t j = 0; j < marks.size(); ++j) acc.checkpoint_sum[j].add(overlaps[j]);
                acc.final_abs2.add(std::norm(overlaps.back()));
                const Operator a = phi * phi.adjoint();
                const double b = phi.squaredNorm();
                acc.rho_num += a;
                acc.rho_num_sq += a.cwiseAbs2();
                acc.rho_cross += b * a;
                acc.weight.add(b);
                acc.weight_sq.add(b * b);
            }
        });

    std::vector<CompensatedSum<cd>> cp(marks.size());
    CompensatedSum<double> abs2, weight, weight_sq;
    Operator rho_num = Operator::Zero(d, d);
    Operator rho_cross = Operator::Zero(d, d);
    Eigen::MatrixXd rho_num_sq = Eigen::MatrixXd::Zero(d, d);
    for (const auto& c : chunks) {
        for (std::size_t j = 0; j < marks.size(); ++j) cp[j].add(c.checkpoint_sum[j].value());
        abs2.add(c.final_abs2.value());
        weight.add(c.weight.value());
        weight_sq.add(c.weight_sq.value());
        rho_num += c.rho_num;
        rho_num_sq += c.rho_num_sq;
        rho_cross += c.rho_cross;
        out.n_used += c.used;
        out.n_excluded += c.excluded;
    }
    if (out.n_excluded > 0) {
        out.warnings.push_back(std::to_string(out.n_excluded) +
                               " trajectories excluded after their norm exceeded 1e100");
    }
    if (out.n_used == 0) throw NumericError("averaged_overlap: every trajectory overflowed");

    const double n = out.n_used;
    for (const auto& s : cp) out.checkpoint_means.push_back(s.value() / n);
    out.mean_overlap = out.checkpoint_means.back();
    if (out.n_used > 1) {
        const double var = std::max(0.0, (abs2.value() - n * std::norm(out.mean_overlap)) / (n - 1.0));
        out.std_error = std::sqrt(var / n);
    }

    cd prev = out.checkpoint_means.front();
    double arg = std::arg(prev);
    for (std::size_t j = 1; j < out.checkpoint_means.size(); ++j) {
        const cd z = out.checkpoint_means[j];
        arg += std::arg(z * std::conj(prev));
        prev = z;
    }
    out.overlap_arg = arg;
    out.arg_std_error = std::abs(out.mean_overlap) > 0 ? out.std_error / std::abs(out.mean_overlap) : INFINITY;

    // ratio estimator R = sum a / sum b with delta-method error
    const double wsum = weight.value();
    out.rho_estimate = rho_num / wsum;
    out.rho_std_error = Eigen::MatrixXd::Zero(d, d);
    if (out.n_used > 1) {
        const double mean_b = wsum / n;
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                const cd ratio = out.rho_estimate(r, c);
                const double ss = rho_num_sq(r, c) - 2.0 * (std::conj(ratio) * rho_cross(r, c)).real() +
                                  std::norm(ratio) * weight_sq.value();
                out.rho_std_error(r, c) = std::sqrt(std::max(0.0, ss) / (n * (n - 1.0))) / mean_b;
            }
        }
    }
    return out;
}

double density_dynamical_term(const LindbladModel& model, const DensityMatrix& rho0, double T, int steps) {
    const auto traj = evolve_density(model, rho0, T, steps);
    std::vector<double> integrand(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        integrand[k] = (traj.states[k] * model.hamiltonian().at(traj.times[k])).trace().real();
    }
    return simpson(integrand, T / steps);
}

QSDEnsembleResult averaged_geometric_phase(const LindbladModel& model, const ShiftSet& shifts,
                                           const PureState& phi0, const QSDConfig& cfg, int density_steps) {
    const auto est = averaged_overlap(model, shifts, phi0, cfg);
    QSDEnsembleResult out;
    out.mean_overlap = est.mean_overlap;
    out.std_error = est.std_error;
    out.overlap_arg = est.overlap_arg;
    out.arg_std_error = est.arg_std_error;
    out.n_used = est.n_used;
    out.n_excluded = est.n_excluded;
    out.rho_estimate = est.rho_estimate;
    out.rho_std_error = est.rho_std_error;
    out.warnings = est.warnings;
    out.dynamical_term =
        density_dynamical_term(effective_model(model, shifts), density_from_state(phi0), cfg.T, density_steps);
    out.alpha_g = out.overlap_arg + out.dynamical_term;
    return out;
}

}  // namespace trajphase
