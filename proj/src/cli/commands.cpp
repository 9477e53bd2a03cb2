#include "trajphase/cli/commands.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "trajphase/cli/csv.hpp"
#include "trajphase/dephasing.hpp"
#include "trajphase/jump.hpp"
#include "trajphase/qsd.hpp"
#include "trajphase/quadrature.hpp"

namespace trajphase::cli {

namespace {

constexpr double kRhoTolerance = 1e-8;

int grid_steps(const ScenarioConfig& cfg, const CommandOptions& opts) { return opts.steps.value_or(cfg.run.steps); }

std::uint64_t run_seed(const ScenarioConfig& cfg, const CommandOptions& opts) { return opts.seed.value_or(cfg.run.seed); }

LindbladModel effective(const Scenario& s) { return s.shifts.empty() ? s.model : apply_shift(s.model, s.shifts); }

std::vector<std::string> sweep_columns(const ScenarioConfig& cfg) {
    std::vector<std::string> cols;
    for (const auto& ax : cfg.sweep) cols.push_back(ax.name);
    return cols;
}

std::string short_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string entry_name(int r, int c) { return std::to_string(r) + std::to_string(c); }

bool is_one_period(const DephasingParams& p, double T) { return std::abs(T - p.period()) <= 1e-12 * T; }

}  // namespace

CommandResult run_evolve(const ScenarioConfig& cfg, const CommandOptions& opts) {
    CommandResult out;
    if (!cfg.sweep.empty()) out.warnings.push_back("evolve ignores the sweep section");
    const Scenario s = build_scenario(cfg);
    const auto traj = evolve_density(effective(s), density_from_state(s.psi0), s.T, grid_steps(cfg, opts));
    out.warnings.insert(out.warnings.end(), traj.warnings.begin(), traj.warnings.end());

    const int d = s.model.dim();
    std::vector<std::string> cols{"t"};
    for (int r = 0; r < d; ++r) {
        cols.push_back("rho" + entry_name(r, r));
        for (int c = r + 1; c < d; ++c) {
            cols.push_back("re_rho" + entry_name(r, c));
            cols.push_back("im_rho" + entry_name(r, c));
        }
    }
    CsvWriter csv(cols);
    std::vector<double> row;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& rho = traj.states[k];
        row.assign(1, traj.times[k]);
        for (int r = 0; r < d; ++r) {
            row.push_back(rho(r, r).real());
            for (int c = r + 1; c < d; ++c) {
                row.push_back(rho(r, c).real());
                row.push_back(rho(r, c).imag());
            }
        }
        csv.add_row(row);
    }
    out.files.push_back({"", csv.str()});
    out.message = "evolve: " + std::to_string(traj.times.size()) + " grid points up to T = " + short_number(s.T);
    return out;
}

CommandResult run_nojump_phase(const ScenarioConfig& cfg, const CommandOptions& opts) {
    CommandResult out;
    auto cols = sweep_columns(cfg);
    for (const char* c : {"gamma_nj", "overlap_arg", "dynamical_term", "survival", "gamma_closed_form", "branch_flag"})
        cols.emplace_back(c);
    CsvWriter csv(cols);
    PhaseOptions phase_opts;
    phase_opts.steps = grid_steps(cfg, opts);

    int crossings = 0, failures = 0, rows = 0;
    for (const auto& point : sweep_points(cfg)) {
        const ScenarioConfig c = at_sweep_point(cfg, point);
        const Scenario s = build_scenario(c);
        std::vector<double> row = point;
        double flag = 0;
        try {
            const auto res = no_jump_geometric_phase(s.model, s.shifts, s.psi0, s.T, phase_opts);
            row.insert(row.end(), {res.gamma, res.overlap_arg, res.dynamical_term, res.final_norm * res.final_norm});
            if (res.zero_crossing) {
                flag = 1;
                ++crossings;
            }
        } catch (const NumericError& e) {
            row.insert(row.end(), {NAN, NAN, NAN, NAN});
            flag = 2;
            ++failures;
            out.warnings.push_back("row " + std::to_string(rows) + ": " + e.what());
        }
        const auto p = as_dephasing(c);
        row.push_back(p && is_one_period(*p, s.T) ? gamma_nj_closed_form(*p) : NAN);
        row.push_back(flag);
        csv.add_row(row);
        ++rows;
    }
    if (crossings > 0) {
        out.warnings.push_back(std::to_string(crossings) +
                               " rows passed through a zero of <psi0|psi(t)>; the half-turn is counted clockwise "
                               "(branch_flag = 1)");
    }
    out.exit_code = failures > 0 ? 1 : 0;
    out.files.push_back({"", csv.str()});
    out.message = "nojump-phase: " + std::to_string(rows) + " rows, " + std::to_string(crossings) + " zero crossings, " +
                  std::to_string(failures) + " failures";
    return out;
}

CommandResult run_jump_sample(const ScenarioConfig& cfg, const CommandOptions& opts) {
    CommandResult out;
    if (!cfg.sweep.empty()) out.warnings.push_back("jump-sample ignores the sweep section");
    const Scenario s = build_scenario(cfg);
    const int n = cfg.run.n_trajectories;
    JumpEnsembleOptions eopts;
    eopts.checkpoints = cfg.run.checkpoints;
    eopts.threads = cfg.run.threads;
    const auto ens = average_jump_ensemble(s.model, s.shifts, s.psi0, s.T, cfg.run.delta_t, n, run_seed(cfg, opts), eopts);
    out.warnings.insert(out.warnings.end(), ens.warnings.begin(), ens.warnings.end());

    const int d = s.model.dim();
    std::vector<std::string> cols{"trajectory", "jumps"};
    for (int k = 0; k < d; ++k) {
        cols.push_back("re_psi" + std::to_string(k));
        cols.push_back("im_psi" + std::to_string(k));
    }
    CsvWriter traj_csv(cols);
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> cells{std::to_string(i), std::to_string(ens.jump_counts[static_cast<std::size_t>(i)])};
        const auto& psi = ens.final_states[static_cast<std::size_t>(i)];
        for (int k = 0; k < d; ++k) {
            cells.push_back(format_double(psi(k).real()));
            cells.push_back(format_double(psi(k).imag()));
        }
        traj_csv.add_cells(cells);
    }

    // master-equation reference for the unravelled (shifted) model
    const LindbladModel eff = effective(s);
    const int steps = grid_steps(cfg, opts);
    const auto ref = evolve_density(eff, density_from_state(s.psi0), s.T, steps);
    std::vector<double> rate(ref.states.size());
    for (std::size_t k = 0; k < ref.states.size(); ++k) {
        double acc = 0;
        for (const auto& l : eff.lindblads()) {
            const Operator& lk = l.at(ref.times[k]);
            acc += (lk.adjoint() * lk * ref.states[k]).trace().real();
        }
        rate[k] = eff.lambda() * acc;
    }
    const double expected_jumps = simpson(rate, s.T / steps);

    const auto& est = ens.rho.back();
    const auto& se = ens.rho_std_error.back();
    const auto& rho_t = ref.final_state();
    double max_dev = 0, max_ratio = 0;
    bool within = true;
    CsvWriter summary({"quantity", "value"});
    auto put = [&summary](const std::string& q, double v) { summary.add_cells({q, format_double(v)}); };
    put("n_trajectories", n);
    put("T", s.T);
    put("delta_t", cfg.run.delta_t);
    put("mean_jumps", ens.mean_jumps);
    put("jumps_std_error", ens.jumps_std_error);
    put("expected_jumps", expected_jumps);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            const double dev = std::abs(est(r, c) - rho_t(r, c));
            max_dev = std::max(max_dev, dev);
            if (se(r, c) > 0) max_ratio = std::max(max_ratio, dev / se(r, c));
            if (dev > 3 * se(r, c) + 1e-12) within = false;
        }
    }
    put("rho_max_deviation", max_dev);
    put("rho_max_deviation_over_se", max_ratio);
    put("rho_within_3se", within ? 1 : 0);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            const auto e = entry_name(r, c);
            put("re_rho" + e, est(r, c).real());
            put("im_rho" + e, est(r, c).imag());
            put("se_rho" + e, se(r, c));
            put("re_rho_ref" + e, rho_t(r, c).real());
            put("im_rho_ref" + e, rho_t(r, c).imag());
        }
    }
    if (!within) out.warnings.push_back("ensemble density deviates from the master equation by more than 3 SE");

    out.files.push_back({"", traj_csv.str()});
    out.files.push_back({".summary.csv", summary.str()});
    out.message = "jump-sample: " + std::to_string(n) + " trajectories, mean jumps " + short_number(ens.mean_jumps) +
                  " +- " + short_number(ens.jumps_std_error) + " (expected " + short_number(expected_jumps) +
                  "), max |rho_est - rho| = " + short_number(max_dev);
    return out;
}

CommandResult run_qsd_phase(const ScenarioConfig& cfg, const CommandOptions& opts) {
    CommandResult out;
    auto cols = sweep_columns(cfg);
    for (const char* c : {"alpha_g", "alpha_g_se", "overlap_arg", "dynamical_term", "re_mean_overlap",
                          "im_mean_overlap", "overlap_se", "n_used", "n_excluded", "closed_form", "closed_form_residual"})
        cols.emplace_back(c);
    CsvWriter csv(cols);
    int rows = 0;
    for (const auto& point : sweep_points(cfg)) {
        const ScenarioConfig c = at_sweep_point(cfg, point);
        const Scenario s = build_scenario(c);
        QSDConfig q;
        q.delta_t = c.run.delta_t;
        q.n_trajectories = c.run.n_trajectories;
        q.seed = run_seed(c, opts);
        q.T = s.T;
        q.checkpoints = c.run.checkpoints;
        q.threads = c.run.threads;
        const auto res = averaged_geometric_phase(s.model, s.shifts, s.psi0, q, grid_steps(c, opts));
        for (const auto& w : res.warnings) out.warnings.push_back("row " + std::to_string(rows) + ": " + w);
        double closed = NAN, residual = NAN;
        if (const auto p = as_dephasing(c)) {
            closed = qsd_overlap_closed_form(*p, s.T) + dynamical_term_dephasing(*p, s.T);
            residual = wrap_angle(res.alpha_g - closed);
            if (residual > pi) residual -= 2 * pi;
        }
        std::vector<double> row = point;
        row.insert(row.end(), {res.alpha_g, res.arg_std_error, res.overlap_arg, res.dynamical_term,
                               res.mean_overlap.real(), res.mean_overlap.imag(), res.std_error,
                               static_cast<double>(res.n_used), static_cast<double>(res.n_excluded), closed, residual});
        csv.add_row(row);
        ++rows;
    }
    out.files.push_back({"", csv.str()});
    out.message = "qsd-phase: " + std::to_string(rows) + " rows";
    return out;
}

CommandResult run_symmetry_check(const ScenarioConfig& cfg, const CommandOptions& opts) {
    CommandResult out;
    if (!cfg.sweep.empty()) out.warnings.push_back("symmetry-check ignores the sweep section");
    Scenario s = build_scenario(cfg);
    if (s.shifts.empty()) s.shifts.assign(s.model.channels(), ComplexSchedule(cd(0.0, 0.0)));
    if (s.shifts.empty()) throw ConfigError("model.lindblad", "symmetry-check needs at least one Lindblad operator");

    bool trivial = true;
    for (const auto& sh : s.shifts)
        for (const cd v : sh.values()) trivial = trivial && v == cd(0.0, 0.0);

    const auto channels = hidden_channels(s.model, s.shifts);
    const bool hidden = shift_is_hidden(s.model, s.shifts);
    const int steps = grid_steps(cfg, opts);
    const auto rho0 = density_from_state(s.psi0);
    const auto base = evolve_density(s.model, rho0, s.T, steps);
    const auto shifted = evolve_density(apply_shift(s.model, s.shifts), rho0, s.T, steps);
    double rho_residual = 0;
    for (std::size_t k = 0; k < base.states.size(); ++k)
        rho_residual = std::max(rho_residual, max_abs(Operator(base.states[k] - shifted.states[k])));

    PhaseOptions popts;
    popts.steps = steps;
    const auto g0 = no_jump_geometric_phase(s.model, {}, s.psi0, s.T, popts);
    const auto gf = no_jump_geometric_phase(s.model, s.shifts, s.psi0, s.T, popts);
    double dgamma = wrap_angle(gf.gamma - g0.gamma);
    if (dgamma > pi) dgamma -= 2 * pi;

    const auto term = shift_hamiltonian_term(s.model, s.shifts);
    double term_norm = 0;
    Eigen::Vector3d field = Eigen::Vector3d::Zero();
    for (const auto& op : term.values()) {
        if (max_abs(op) > term_norm) {
            term_norm = max_abs(op);
            if (s.model.dim() == 2) {
                int i = 0;
                for (auto ax : {Axis::x, Axis::y, Axis::z}) field(i++) = 0.5 * (pauli(ax) * op).trace().real();
            }
        }
    }

    std::ostringstream text;
    if (trivial) {
        text << "hidden: yes; no observable differences";
    } else if (hidden) {
        text << "hidden: yes; rho residual = " << short_number(rho_residual)
             << (rho_residual <= kRhoTolerance ? " (<= 1e-08)" : " (EXCEEDS 1e-08)")
             << "; gamma_nj shift = " << short_number(dgamma);
    } else if (s.model.dim() == 2 && field.norm() > 0) {
        text << "hidden: no; Hamiltonian gains Zeeman term (" << short_number(field(0)) << ", "
             << short_number(field(1)) << ", " << short_number(field(2)) << ").sigma";
    } else {
        text << "hidden: no; Hamiltonian gains a term of max-entry " << short_number(term_norm);
    }

    nlohmann::ordered_json j;
    j["hidden"] = hidden;
    j["channels"] = nlohmann::json::array();
    for (std::size_t m = 0; m < channels.size(); ++m) j["channels"].push_back({{"index", m}, {"hidden", static_cast<bool>(channels[m])}});
    j["T"] = s.T;
    j["steps"] = steps;
    j["rho_residual"] = rho_residual;
    j["rho_tolerance"] = kRhoTolerance;
    j["rho_invariant"] = rho_residual <= kRhoTolerance;
    j["gamma_nj_unshifted"] = g0.gamma;
    j["gamma_nj_shifted"] = gf.gamma;
    j["gamma_nj_shift"] = dgamma;
    j["hamiltonian_term_max_entry"] = term_norm;
    if (s.model.dim() == 2) j["zeeman_field"] = {field(0), field(1), field(2)};
    j["verdict"] = text.str();

    if (hidden && rho_residual > kRhoTolerance) {
        out.exit_code = 1;
        out.warnings.push_back("hidden shift changed rho(t) by more than 1e-8");
    }
    out.files.push_back({"", j.dump(2) + "\n"});
    out.message = text.str();
    return out;
}

CommandResult run_command(const std::string& name, const ScenarioConfig& cfg, const CommandOptions& opts) {
    if (name == "evolve") return run_evolve(cfg, opts);
    if (name == "nojump-phase") return run_nojump_phase(cfg, opts);
    if (name == "jump-sample") return run_jump_sample(cfg, opts);
    if (name == "qsd-phase") return run_qsd_phase(cfg, opts);
    if (name == "symmetry-check") return run_symmetry_check(cfg, opts);
    throw ConfigError("", "unknown command '" + name + "'");
}

}  // namespace trajphase::cli
