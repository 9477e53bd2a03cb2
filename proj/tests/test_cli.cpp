#include <cmath>
#include <string>

#include "doctest.h"
#include "trajphase/cli/commands.hpp"
#include "trajphase/cli/csv.hpp"

using namespace trajphase;
using namespace trajphase::cli;

namespace {

const char* kDephasing = R"(
model:
  hamiltonian: {preset: precession, omega: 1}
  lindblad: [sigma_z]
  lambda: 0.1
shifts: [2]
initial_state: {theta: pi/2, phi: 0}
run:
  periods: 1
  steps: 512
)";

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "case.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("expressions") {
    CHECK(parse_expression("pi/2") == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(parse_expression("2*pi") == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(parse_expression("-(1 + 2) * 3") == -9.0);
    CHECK(parse_expression("1e-3") == 1e-3);
    CHECK(parse_expression("5*pi/6") == doctest::Approx(5 * pi / 6).epsilon(1e-15));
    CHECK_THROWS_AS(parse_expression("2*"), InvalidArgument);
    CHECK_THROWS_AS(parse_expression("(1"), InvalidArgument);
    CHECK_THROWS_AS(parse_expression("e"), InvalidArgument);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "1.0000000000000001e-01");
    CHECK(format_double(-2.0) == "-2.0000000000000000e+00");
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(-NAN) == "nan");
    // 17 significant digits round-trip every double
    for (double v : {pi, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.858258991298841}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv writer") {
    CsvWriter w({"a", "b"});
    w.add_row({1.0, 0.5});
    w.add_cells({"3", "x"});
    CHECK(w.str() == "# trajphase-schema: 1\na,b\n1.0000000000000000e+00,5.0000000000000000e-01\n3,x\n");
    CHECK_THROWS_AS(w.add_row({1.0}), InvalidArgument);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("config round trip") {
    for (const char* name : {"fig1", "dephasing", "jump_sample", "qsd_phase", "symmetry_dephasing", "symmetry_decay"}) {
        CAPTURE(name);
        const auto cfg = load_config(preset_path(name));
        const std::string once = serialize_config(cfg);
        const std::string twice = serialize_config(parse_config(once));
        CHECK(once == twice);
    }
    const auto cfg = parse_config(R"(
model:
  dim: 2
  hamiltonian: {matrix: [[0.5, 0], [0, -0.5]]}
  lindblad: [{matrix: [[0, 1], [0, 0]]}, sigma_z]
  lambda: 0.25
shifts: [[0.1, -0.2], {spacing: 0.5, values: [0, [1, 1], 2]}]
initial_state: {amplitudes: [[0.6, 0], [0, 0.8]]}
run: {T: 1.5, steps: 300, seed: 9}
)");
    const auto again = parse_config(serialize_config(cfg));
    CHECK(serialize_config(again) == serialize_config(cfg));
    CHECK(again.shifts[1].values[1] == cd(1, 1));
    CHECK(again.shifts[1].spacing == 0.5);
    CHECK(again.initial_state.amplitudes[1] == cd(0, 0.8));
}

TEST_CASE("config errors carry location") {
    CHECK(error_of("model:\n  hamiltonian: precession\n  lambdda: 1\n").find("case.yaml:3:") != std::string::npos);
    CHECK(error_of("model:\n  hamiltonian: precession\n  lambdda: 1\n").find("lambdda") != std::string::npos);
    CHECK(error_of("model:\n  hamiltonian: {preset: precession}\n  lambda: -1\n").find("model.lambda") !=
          std::string::npos);
    CHECK(error_of("model:\n  hamiltonian: spin\n").find("case.yaml:2:") != std::string::npos);
    CHECK(error_of("model: [1, 2\n").find("case.yaml:") != std::string::npos);
    CHECK(error_of("run: {T: 1}\n").find("model") != std::string::npos);
    CHECK_FALSE(error_of("model:\n  hamiltonian: precession\n  lindblad: [sigma_z]\nshifts: [1, 2]\n").empty());
    CHECK_FALSE(error_of(std::string(kDephasing) + "sweep: {f: [0], lambda: [0], omega: [1]}\n").empty());
}

TEST_CASE("scenario validation") {
    auto cfg = parse_config(kDephasing);
    const auto s = build_scenario(cfg);
    CHECK(s.model.dim() == 2);
    CHECK(s.T == doctest::Approx(2 * pi).epsilon(1e-15));
    REQUIRE(as_dephasing(cfg));
    CHECK(as_dephasing(cfg)->f == 2.0);

    auto bad = cfg;
    bad.initial_state.bloch = false;
    bad.initial_state.amplitudes = {cd(1, 0), cd(1, 0)};
    CHECK(build_scenario(bad).psi0.norm() == doctest::Approx(1.0).epsilon(1e-15));
    bad.initial_state.amplitudes = {cd(0, 0), cd(0, 0)};
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);
    bad.initial_state.amplitudes = {cd(1, 0)};
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);

    bad = parse_config("model:\n  hamiltonian: {matrix: [[0, 1], [0, 0]]}\nrun: {T: 1}\n");
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);

    bad = parse_config("model:\n  hamiltonian: {preset: zero, dim: 3}\n  lindblad: [sigma_z]\nrun: {T: 1}\n");
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);

    bad = parse_config("model:\n  hamiltonian: {preset: zero, dim: 2}\n  lindblad: [sigma_z]\nrun: {periods: 1}\n");
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);

    bad = parse_config(
        "model:\n  hamiltonian: precession\n  lindblad: [sigma_z]\nshifts: [{spacing: 1, values: [1, 2]}]\n"
        "run: {T: 3}\n");
    CHECK_THROWS_AS(build_scenario(bad), ConfigError);
}

TEST_CASE("sweep points") {
    const auto cfg = load_config(preset_path("fig1"));
    const auto pts = sweep_points(cfg);
    REQUIRE(pts.size() == 303);
    CHECK(pts[0] == std::vector<double>{0.0, 0.0});
    CHECK(pts[101] == std::vector<double>{0.2, 0.0});
    CHECK(pts[302] == std::vector<double>{2.0, 1.0});
    const auto c = at_sweep_point(cfg, pts[150]);
    CHECK(c.lambda == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(c.shifts[0].values[0] == cd(0.2, 0));
    CHECK(c.sweep.empty());
}

TEST_CASE("commands are deterministic") {
    auto cfg = parse_config(kDephasing);
    cfg.run.n_trajectories = 200;
    cfg.run.delta_t = 1e-2;
    for (const char* name : {"evolve", "nojump-phase", "jump-sample", "qsd-phase", "symmetry-check"}) {
        CAPTURE(name);
        const auto a = run_command(name, cfg, {});
        const auto b = run_command(name, cfg, {});
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t k = 0; k < a.files.size(); ++k) CHECK(a.files[k].content == b.files[k].content);
        CHECK(a.exit_code == 0);
    }
    const auto s1 = run_command("jump-sample", cfg, {.seed = 1, .steps = {}});
    const auto s2 = run_command("jump-sample", cfg, {.seed = 2, .steps = {}});
    CHECK(s1.files[0].content != s2.files[0].content);
    CHECK_THROWS_AS(run_command("bogus", cfg, {}), ConfigError);
}

TEST_CASE("command outputs") {
    const auto cfg = parse_config(kDephasing);
    const auto ev = run_command("evolve", cfg, {.seed = {}, .steps = 64});
    CHECK(count_lines(ev.files[0].content) == 2 + 65);
    CHECK(ev.files[0].content.find("t,rho00,re_rho01,im_rho01,rho11\n") != std::string::npos);

    const auto nj = run_command("nojump-phase", cfg, {});
    const std::string& text = nj.files[0].content;
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    const double gamma = std::stod(last.substr(0, last.find(',')));
    const double closed = gamma_nj_closed_form({1.0, 0.1, 2.0, pi / 2, 0.0});
    CHECK(std::abs(std::remainder(gamma - closed, 2 * pi)) < 1e-6);

    const auto sym = run_command("symmetry-check", cfg, {});
    CHECK(sym.message.rfind("hidden: yes; rho residual", 0) == 0);
    auto zero = cfg;
    zero.shifts[0].values = {cd(0, 0)};
    CHECK(run_command("symmetry-check", zero, {}).message == "hidden: yes; no observable differences");
    auto decay = parse_config(
        "model:\n  hamiltonian: precession\n  lindblad: [sigma_minus]\n  lambda: 0.1\nshifts: [[0, 0.5]]\n"
        "run: {periods: 1, steps: 256}\n");
    CHECK(run_command("symmetry-check", decay, {}).message.rfind("hidden: no; Hamiltonian gains Zeeman term", 0) == 0);
}

TEST_CASE("numeric failures are flagged per row") {
    auto cfg = parse_config(kDephasing);
    cfg.lambda = 400;
    cfg.run.steps = 8;
    cfg.sweep = {{"f", {2.0}}};
    const auto res = run_command("nojump-phase", cfg, {});
    CHECK(res.exit_code == 1);
    CHECK(res.files[0].content.find("nan,nan,nan,nan") != std::string::npos);
    CHECK(res.files[0].content.find(",2.0000000000000000e+00\n") != std::string::npos);
}
