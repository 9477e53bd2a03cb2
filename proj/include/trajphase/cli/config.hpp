#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajphase/dephasing.hpp"
#include "trajphase/lindblad.hpp"

namespace trajphase::cli {

/// Malformed configuration. `where()` is "source:line:column" when known.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message, const std::string& where = "");
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Named operator or matrix literal.
struct OperatorSpec {
    std::string preset;  // precession, zero, sigma_x/y/z, sigma_minus, annihilation; empty for a literal
    double omega = 1.0;  // precession
    int dim = 0;         // annihilation
    Operator matrix;     // literal
};

/// Constant complex shift (one value) or a piecewise table on a uniform grid.
struct ShiftSpec {
    std::vector<cd> values;
    double spacing = 0.0;
};

struct StateSpec {
    bool bloch = true;
    BlochAngles angles{pi / 2, 0.0};
    std::vector<cd> amplitudes;
};

struct RunSpec {
    std::optional<double> T;
    std::optional<double> periods;  // T = periods * 2 pi / omega (precession only)
    int steps = kDefaultSteps;
    double delta_t = 1e-3;
    int n_trajectories = 1000;
    std::uint64_t seed = 1;
    int threads = 0;
    int checkpoints = 64;
};

struct SweepAxis {
    std::string name;  // lambda, f, theta0, omega, T
    std::vector<double> values;
};

struct ScenarioConfig {
    int dim = 0;  // 0: inferred from the Hamiltonian
    OperatorSpec hamiltonian;
    std::vector<OperatorSpec> lindblads;
    double lambda = 0.0;
    std::vector<ShiftSpec> shifts;
    StateSpec initial_state;
    RunSpec run;
    std::vector<SweepAxis> sweep;  // at most two axes
};

/// Numbers and the small grammar of +, -, *, /, parentheses and `pi`.
double parse_expression(const std::string& text);

ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);
/// Canonical YAML; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const ScenarioConfig& cfg);

/// Path of a bundled preset such as "fig1".
std::string preset_path(const std::string& name);

/// Every sweep point in row order (first axis outermost); one empty point
/// when there is no sweep.
std::vector<std::vector<double>> sweep_points(const ScenarioConfig& cfg);
/// Copy of cfg with sweep values substituted. `f` sets every channel's shift
/// to the real constant f.
ScenarioConfig at_sweep_point(const ScenarioConfig& cfg, const std::vector<double>& point);

struct Scenario {
    LindbladModel model;
    ShiftSet shifts;  // empty when no shift is configured
    PureState psi0;
    double T;
};

/// Throws ConfigError for inconsistent dimensions, bad presets or a missing T.
Scenario build_scenario(const ScenarioConfig& cfg);

/// Dephasing parameters when the config is the precessing dephasing qubit with
/// a real constant shift (or none) and a Bloch initial state.
std::optional<DephasingParams> as_dephasing(const ScenarioConfig& cfg);

}  // namespace trajphase::cli
