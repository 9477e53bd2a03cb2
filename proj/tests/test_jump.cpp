#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "trajphase/dephasing.hpp"
#include "trajphase/jump.hpp"

using namespace trajphase;

namespace {

Operator random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Operator a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = cd(n(rng), n(rng));
    return a;
}

DephasingParams params(double lambda, double f, double theta0 = pi / 2) { return {1.0, lambda, f, theta0, 0.0}; }

double kraus_residual_max(const LindbladModel& model, const ShiftSet& shifts, double dt) {
    const auto e = kraus_set(model, {}, dt);
    const auto f = kraus_set(model, shifts, dt);
    const auto w = kraus_connection_matrix(shifts_at(shifts, 0.0), model.lambda(), dt);
    double worst = 0;
    for (std::size_t mu = 0; mu < f.ops.size(); ++mu) {
        Operator acc = Operator::Zero(model.dim(), model.dim());
        for (std::size_t nu = 0; nu < e.ops.size(); ++nu) acc += w(mu, nu) * e.ops[nu];
        worst = std::max(worst, max_abs(Operator(acc - f.ops[mu])));
    }
    return worst;
}

}  // namespace

TEST_CASE("no-jump generators") {
    const double w = 1.0, lam = 0.5;
    const auto model = dephasing_model(params(lam, 0.0));
    const Operator ht = no_jump_hamiltonian(model).k_tilde.at(0);
    CHECK(max_abs(Operator(ht - (0.5 * w * pauli(Axis::z) - 0.5 * I * lam * identity(2)))) < 1e-15);

    const auto closed = dephasing_model(params(0.0, 0.0));
    CHECK(max_abs(Operator(no_jump_hamiltonian(closed).k_tilde.at(0) - closed.hamiltonian().at(0))) == 0.0);

    const Operator lminus = pauli(Axis::x) - I * pauli(Axis::y);
    const double lp = 0.3;
    const LindbladModel decay(OperatorSchedule(Operator(0.5 * w * pauli(Axis::z))), std::vector<Operator>{lminus}, lp);
    const Operator expected = 0.5 * w * pauli(Axis::z) - I * lp * pauli(Axis::z) - I * lp * identity(2);
    CHECK(max_abs(Operator(no_jump_hamiltonian(decay).k_tilde.at(0) - expected)) < 1e-15);

    const double f = 0.2;
    const Operator kt = shifted_no_jump_hamiltonian(model, {ComplexSchedule(cd(f, 0))}).k_tilde.at(0);
    CHECK(max_abs(Operator(kt - (ht + I * lam * f * pauli(Axis::z) - 0.5 * I * lam * f * f * identity(2)))) < 1e-15);
    const Operator anti = (kt - kt.adjoint()) / (2.0 * I);
    CHECK(anti(0, 0).real() == doctest::Approx(lam * f * (1 - f / 2) - lam / 2));
    CHECK(max_abs(Operator(shifted_no_jump_hamiltonian(model, {ComplexSchedule(cd(0, 0))}).k_tilde.at(0) - ht)) == 0.0);
    CHECK_THROWS_AS(shifted_no_jump_hamiltonian(model, {}), InvalidArgument);
}

TEST_CASE("shifted K~ equals the no-jump generator of the shifted model") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const int channels = 1 + rep % 3;
        std::vector<Operator> ls;
        ShiftSet shifts;
        for (int c = 0; c < channels; ++c) {
            ls.push_back(random_matrix(2, rng));
            shifts.emplace_back(cd(n(rng), n(rng)));
        }
        const Operator a = random_matrix(2, rng);
        const LindbladModel model(OperatorSchedule(Operator((a + a.adjoint()) / 2.0)), ls, 0.3 + 0.1 * rep);
        const Operator lhs = shifted_no_jump_hamiltonian(model, shifts).k_tilde.at(0);
        const Operator rhs = no_jump_hamiltonian(apply_shift(model, shifts)).k_tilde.at(0);
        CHECK(max_abs(Operator(lhs - rhs)) <= 1e-12);

        Eigen::HouseholderQR<Operator> qr(random_matrix(channels, rng));
        const Operator v = qr.householderQ();
        const Operator mixed = no_jump_hamiltonian(apply_unitary_mixing(model, v)).k_tilde.at(0);
        CHECK(max_abs(Operator(mixed - no_jump_hamiltonian(model).k_tilde.at(0))) <= 1e-12);
    }
}

TEST_CASE("propagate_no_jump: norms and closed forms") {
    const double lam = 0.4, T = 3.0;
    for (double theta : {0.3, pi / 2, 2.0}) {
        const auto p = params(lam, 0.0, theta);
        const auto rec = propagate_no_jump(no_jump_hamiltonian(dephasing_model(p)), dephasing_initial_state(p), T, 600);
        for (std::size_t k = 0; k < rec.times.size(); ++k)
            CHECK(rec.states[k].squaredNorm() == doctest::Approx(std::exp(-lam * rec.times[k])).epsilon(1e-12));
        CHECK(no_jump_probability(rec) == doctest::Approx(std::exp(-lam * T)).epsilon(1e-12));
        CHECK(rec.survival == doctest::Approx(std::exp(-lam * T)).epsilon(1e-12));
    }

    const auto closed = params(0.0, 0.3, 1.0);
    const auto rec = propagate_no_jump(no_jump_hamiltonian(dephasing_model(closed)), dephasing_initial_state(closed), T);
    for (const auto& psi : rec.states) CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(no_jump_probability(rec) == doctest::Approx(1.0).epsilon(1e-12));

    // shifted path matches the analytic amplitudes
    for (double f : {-0.7, 0.2, 2.0}) {
        const auto p = params(0.3, f, 1.1);
        const auto gen = shifted_no_jump_hamiltonian(dephasing_model(p), dephasing_shift(p));
        const auto r = propagate_no_jump(gen, dephasing_initial_state(p), T, 300);
        for (std::size_t k = 0; k < r.times.size(); k += 30) {
            const auto expected = oracle::dephasing_no_jump(p.omega, p.lambda, f, p.theta0, 0.0, r.times[k]);
            CHECK(max_abs(PureState(r.states[k] - expected)) < 1e-12);
        }
    }

    // survival probability over a period at theta0 = pi/2
    const auto p = params(0.1, 2.0);
    const double period = p.period();
    const auto r = propagate_no_jump(shifted_no_jump_hamiltonian(dephasing_model(p), dephasing_shift(p)),
                                     dephasing_initial_state(p), period);
    const double expected = std::exp(-p.lambda * period * (1 + p.f * p.f)) * std::cosh(4 * pi * p.f * p.lambda);
    CHECK(no_jump_probability(r) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(propagate_no_jump(no_jump_hamiltonian(dephasing_model(p)), PureState::Zero(2), 1.0), InvalidArgument);
    CHECK_THROWS_AS(propagate_no_jump(no_jump_hamiltonian(dephasing_model(params(800.0, 0))),
                                      dephasing_initial_state(p), 1.0, 10),
                    TotalDecayError);
}

TEST_CASE("norm is non-increasing for unshifted models") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const Operator a = random_matrix(3, rng);
        const LindbladModel model(OperatorSchedule(Operator((a + a.adjoint()) / 2.0)),
                                  std::vector<Operator>{random_matrix(3, rng), random_matrix(3, rng)}, 0.2);
        PureState psi0 = random_matrix(3, rng).col(0);
        psi0.normalize();
        const auto rec = propagate_no_jump(no_jump_hamiltonian(model), psi0, 2.0, 400);
        for (std::size_t k = 1; k < rec.states.size(); ++k)
            CHECK(rec.states[k].norm() <= rec.states[k - 1].norm() * (1 + 1e-14));
    }
}

TEST_CASE("Bloch spiral of the shifted no-jump path") {
    for (double f : {0.0, 0.5, 1.0, -0.4}) {
        const auto p = params(1.0, f, 1.2);
        const auto rec = propagate_no_jump(shifted_no_jump_hamiltonian(dephasing_model(p), dephasing_shift(p)),
                                           dephasing_initial_state(p), 4.0, 400);
        double prev_theta = p.theta0;
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            const auto got = bloch_from_state(rec.states[k]);
            const auto expected = bloch_spiral(p, rec.times[k]);
            CHECK(got.theta == doctest::Approx(expected.theta).epsilon(1e-8));
            CHECK(std::abs(oracle::angle_diff(got.phi, expected.phi)) < 1e-8);
            if (f > 0 && k > 0) CHECK(got.theta < prev_theta);
            prev_theta = got.theta;
        }
    }
}

TEST_CASE("no-jump geometric phase examples") {
    for (double lam : {0.0, 0.3, 1.0}) {
        const auto p = params(lam, 0.0);
        const auto res = no_jump_geometric_phase(dephasing_model(p), {}, dephasing_initial_state(p), p.period());
        CHECK(std::abs(oracle::angle_diff(res.gamma, -pi)) < 1e-6);
        CHECK(res.gamma == res.overlap_arg + res.dynamical_term);
        CHECK(res.zero_crossing.has_value());
        PhaseOptions strict;
        strict.strict = true;
        CHECK_THROWS_AS(no_jump_geometric_phase(dephasing_model(p), {}, dephasing_initial_state(p), p.period(), strict),
                        BranchTrackingError);
    }
    for (double f : {-2.0, 0.2, 2.0}) {
        for (double theta : {pi / 6, pi / 2, 5 * pi / 6}) {
            const auto p = params(0.7, f, theta);
            const auto res =
                no_jump_geometric_phase(dephasing_model(p), dephasing_shift(p), dephasing_initial_state(p), p.period());
            CHECK(std::abs(oracle::angle_diff(res.gamma, gamma_nj_closed_form(p))) < 1e-6);
            CHECK(std::abs(oracle::angle_diff(res.gamma, oracle::dephasing_gamma_quadrature(1.0, 0.7, f, theta))) < 1e-6);
        }
    }
    const auto pole = params(0.5, 0.8, 0.0);
    const auto res =
        no_jump_geometric_phase(dephasing_model(pole), dephasing_shift(pole), dephasing_initial_state(pole), pole.period());
    CHECK(std::abs(res.gamma) < 1e-12);
    CHECK_THROWS_AS(no_jump_geometric_phase(dephasing_model(pole), {}, PureState::Ones(2), 1.0), InvalidArgument);
}

TEST_CASE("hidden parameter changes gamma_nj but not rho") {
    const auto p0 = params(0.5, 0.0);
    const auto pf = params(0.5, 0.2);
    const auto model = dephasing_model(p0);
    const auto psi0 = dephasing_initial_state(p0);
    const auto g0 = no_jump_geometric_phase(model, {}, psi0, p0.period());
    const auto gf = no_jump_geometric_phase(model, dephasing_shift(pf), psi0, p0.period());
    CHECK(std::abs(oracle::angle_diff(gf.gamma, g0.gamma)) > 1e-3);
    const auto rho0 = density_from_state(psi0);
    const auto a = evolve_density(model, rho0, p0.period()).final_state();
    const auto b = evolve_density(apply_shift(model, dephasing_shift(pf)), rho0, p0.period()).final_state();
    CHECK(max_abs(Operator(a - b)) <= 1e-8);
}

TEST_CASE("gauge transformation leaves gamma unchanged") {
    const auto p = params(0.4, 0.3, 1.0);
    const auto model = dephasing_model(p);
    auto check = [&](cd rate, cd scale) {
        GaugeFactor c{[=](double t) { return scale * std::exp(rate * t); },
                      [=](double t) { return rate * scale * std::exp(rate * t); }};
        const auto [orig, gauged] =
            gauge_transform_check(model, dephasing_shift(p), dephasing_initial_state(p), p.period(), c);
        CHECK(std::abs(orig.gamma - gauged.gamma) <= 1e-8);
    };
    check(cd(0.0, 0.7), 1.0);
    check(cd(0.0, 0.0), 2.0);
    check(cd(0.3, 0.7), 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int rep = 0; rep < 5; ++rep) check(cd(u(rng), u(rng)), 1.0);
}

TEST_CASE("jump trajectories") {
    RngStream rng = derive_stream(5, 0);
    const auto closed = params(0.0, 0.0);
    const auto rec = sample_jump_trajectory(dephasing_model(closed), {}, dephasing_initial_state(closed), 3.0, 1e-2, rng);
    CHECK(rec.jumps.empty());
    const auto exact = propagate_no_jump(no_jump_hamiltonian(dephasing_model(closed)), dephasing_initial_state(closed),
                                         3.0, 300);
    CHECK(max_abs(PureState(rec.states.back() - exact.states.back())) < 1e-12);

    // sigma_z jumps flip the relative sign: azimuth moves by pi
    const auto p = params(2.0, 0.0);
    RngStream r2 = derive_stream(11, 3);
    const auto tr = sample_jump_trajectory(dephasing_model(p), {}, dephasing_initial_state(p), 5.0, 1e-3, r2);
    REQUIRE_FALSE(tr.jumps.empty());
    for (std::size_t k = 1; k < tr.jumps.size(); ++k) CHECK(tr.jumps[k].time > tr.jumps[k - 1].time);
    const auto& j = tr.jumps.front();
    const auto idx = static_cast<std::size_t>(std::llround(j.time / 1e-3));
    const auto before = bloch_from_state(tr.states[idx - 1]);
    const auto after = bloch_from_state(tr.states[idx]);
    CHECK(std::abs(oracle::angle_diff(after.phi, before.phi + pi)) < 1e-10);

    // determinism from the stream
    RngStream a = derive_stream(11, 3);
    const auto again = sample_jump_trajectory(dephasing_model(p), {}, dephasing_initial_state(p), 5.0, 1e-3, a);
    CHECK(again.jumps.size() == tr.jumps.size());
    CHECK(max_abs(PureState(again.states.back() - tr.states.back())) == 0.0);

    RngStream r3 = derive_stream(1, 1);
    const auto warn = sample_jump_trajectory(dephasing_model(params(1.0, 0.0)), {}, dephasing_initial_state(p), 1.0, 0.2, r3);
    CHECK_FALSE(warn.warnings.empty());
    RngStream r4 = derive_stream(1, 1);
    CHECK_THROWS_AS(
        sample_jump_trajectory(dephasing_model(params(1.0, 0.0)), {}, dephasing_initial_state(p), 2.0, 2.0, r4),
        StepSizeError);
}

TEST_CASE("jump ensemble reproduces the master equation") {
    const auto p = params(1.0, 0.0);
    const auto model = dephasing_model(p);
    const auto psi0 = dephasing_initial_state(p);
    const double T = 1.0, dt = 1e-3;
    const auto rho_t = evolve_density(model, density_from_state(psi0), T).final_state();

    const auto unshifted = average_jump_ensemble(model, {}, psi0, T, dt, 10000, 42);
    const auto shifted = average_jump_ensemble(model, dephasing_shift(params(1.0, 0.2)), psi0, T, dt, 10000, 43);
    for (const auto* ens : {&unshifted, &shifted}) {
        const auto& est = ens->rho.back();
        const auto& se = ens->rho_std_error.back();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) CHECK(std::abs(est(r, c) - rho_t(r, c)) <= 3 * se(r, c) + 1e-12);
    }
    CHECK(std::abs(unshifted.mean_jumps - p.lambda * T) <= 3 * unshifted.jumps_std_error);
    const Operator diff = unshifted.rho.back() - shifted.rho.back();
    const Eigen::MatrixXd comb =
        (unshifted.rho_std_error.back().cwiseAbs2() + shifted.rho_std_error.back().cwiseAbs2()).cwiseSqrt();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(std::abs(diff(r, c)) <= 3 * comb(r, c) + 1e-12);

    const auto closed = params(0.0, 0.0);
    const auto single = average_jump_ensemble(dephasing_model(closed), {}, psi0, 2.0, 1e-2, 1, 7);
    const auto exact = evolve_density(dephasing_model(closed), density_from_state(psi0), 2.0, 200).final_state();
    CHECK(max_abs(Operator(single.rho.back() - exact)) < 1e-10);
}

TEST_CASE("jump ensemble is independent of the thread count") {
    const auto p = params(1.0, 0.2);
    JumpEnsembleOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto model = dephasing_model(p);
    const auto a = average_jump_ensemble(model, dephasing_shift(p), dephasing_initial_state(p), 0.5, 1e-3, 700, 9, one);
    const auto b = average_jump_ensemble(model, dephasing_shift(p), dephasing_initial_state(p), 0.5, 1e-3, 700, 9, four);
    CHECK(a.jump_counts == b.jump_counts);
    CHECK(max_abs(Operator(a.rho.back() - b.rho.back())) == 0.0);
}

TEST_CASE("Kraus sets") {
    const double dt = 1e-3;
    const auto p = params(0.1, 0.0);
    const auto model = dephasing_model(p);
    const auto e = kraus_set(model, {}, dt);
    REQUIRE(e.ops.size() == 2);
    CHECK(max_abs(Operator(e.ops[0] - (identity(2) - I * dt * no_jump_hamiltonian(model).k_tilde.at(0)))) == 0.0);
    CHECK(max_abs(Operator(e.ops[1] - std::sqrt(p.lambda * dt) * pauli(Axis::z))) < 1e-16);
    CHECK(kraus_set(dephasing_model(params(0.0, 0.0)), {}, dt).ops.size() == 1);

    // completeness residual shrinks as dt^2
    const ShiftSet shift{ComplexSchedule(cd(0.2, 0))};
    std::vector<double> dts{1e-2, 5e-3, 2.5e-3}, res;
    for (double h : dts) res.push_back(completeness_residual(kraus_set(model, shift, h)));
    CHECK(oracle::loglog_slope(dts, res) == doctest::Approx(2.0).epsilon(0.05));

    const auto rho = density_from_state(dephasing_initial_state(p));
    CHECK(kraus_maps_equal(model, {ComplexSchedule(cd(0, 0))}, dt, rho) == 0.0);
    CHECK(kraus_maps_equal(model, shift, dt, Operator(identity(2) / 2.0)) <= 1e-4);
    CHECK_THROWS_AS(kraus_maps_equal(model, {ComplexSchedule(cd(0, 0.2))}, dt, rho), InvalidArgument);
}

TEST_CASE("Kraus connection matrix") {
    const std::vector<cd> zero{cd(0, 0)};
    CHECK(max_abs(Operator(kraus_connection_matrix(zero, 0.1, 1e-3) - Operator::Identity(2, 2))) == 0.0);

    const std::vector<cd> f{cd(0.2, 0)};
    const double lam = 0.1;
    const auto w = kraus_connection_matrix(f, lam, 1e-3);
    CHECK(w(0, 0).real() == doctest::Approx(1 - 0.5 * lam * 1e-3 * 0.04));
    CHECK(w(1, 0).real() == doctest::Approx(-std::sqrt(lam * 1e-3) * 0.2));
    CHECK(max_abs(Operator(w.adjoint() * w - Operator::Identity(2, 2))) <= 1e-5);

    // F = W E holds at first order; the mismatch comes from the f * sqrt(lambda dt) * H~ dt cross term
    const auto model = dephasing_model(params(lam, 0.0));
    const ShiftSet shift{ComplexSchedule(cd(0.2, 0))};
    const double r1 = kraus_residual_max(model, shift, 1e-3);
    const double r2 = kraus_residual_max(model, shift, 5e-4);
    CHECK(r1 < 1e-5);
    CHECK(std::log(r1 / r2) / std::log(2.0) == doctest::Approx(1.5).epsilon(0.05));
}
