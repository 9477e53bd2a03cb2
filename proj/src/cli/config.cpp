#include "trajphase/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "trajphase/cli/csv.hpp"

namespace trajphase::cli {

ConfigError::ConfigError(const std::string& field, const std::string& message, const std::string& where)
    : Error((where.empty() ? "" : where + ": ") + (field.empty() ? "" : field + ": ") + message), field_(field) {}

namespace {

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view s) : s_(s) {}

    double parse() {
        const double v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw InvalidArgument(msg); }

    void skip() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double sum() {
        double v = product();
        while (true) {
            if (eat('+')) {
                v += product();
            } else if (eat('-')) {
                v -= product();
            } else {
                return v;
            }
        }
    }

    double product() {
        double v = unary();
        while (true) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                v /= unary();
            } else {
                return v;
            }
        }
    }

    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return primary();
    }

    double primary() {
        skip();
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (s_.substr(pos_, 2) == "pi") {
            pos_ += 2;
            return pi;
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (res.ec != std::errc()) fail(pos_ < s_.size() ? "expected a number at '" + std::string(s_.substr(pos_)) + "'"
                                                          : "expression ends early");
        pos_ = static_cast<std::size_t>(res.ptr - s_.data());
        return v;
    }
};

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    std::string where(const YAML::Node& n) const {
        const auto m = n.Mark();
        if (m.is_null()) return source_;
        return source_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
    }

    [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) const {
        throw ConfigError(field, msg, where(n));
    }

    void keys(const YAML::Node& n, const std::string& field, const std::set<std::string>& allowed) const {
        if (!n.IsMap()) fail(n, field, "expected a mapping");
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                std::string list;
                for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
                fail(kv.first, field, "unknown key '" + key + "' (expected one of: " + list + ")");
            }
        }
    }

    double number(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(n, field, "expected a number");
        try {
            const double v = parse_expression(n.Scalar());
            if (!std::isfinite(v)) fail(n, field, "value is not finite");
            return v;
        } catch (const InvalidArgument& e) {
            fail(n, field, "cannot read '" + n.Scalar() + "' as a number (" + e.what() + ")");
        }
    }

    long long integer(const YAML::Node& n, const std::string& field, long long lo) const {
        const double v = number(n, field);
        if (v != std::floor(v) || v < static_cast<double>(lo) || v > 9.0e15)
            fail(n, field, "expected an integer >= " + std::to_string(lo));
        return static_cast<long long>(v);
    }

    cd complex_value(const YAML::Node& n, const std::string& field) const {
        if (n.IsSequence()) {
            if (n.size() != 2) fail(n, field, "complex values are [re, im] pairs");
            return {number(n[0], field), number(n[1], field)};
        }
        return {number(n, field), 0.0};
    }

    Operator matrix(const YAML::Node& n, const std::string& field) const {
        if (!n.IsSequence() || n.size() == 0) fail(n, field, "matrix literal must be a non-empty list of rows");
        const auto d = static_cast<Eigen::Index>(n.size());
        Operator m(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto row = n[static_cast<std::size_t>(r)];
            const std::string rf = field + "[" + std::to_string(r) + "]";
            if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != d)
                fail(row, rf, "matrix must be square with " + std::to_string(d) + " entries per row");
            for (Eigen::Index c = 0; c < d; ++c) m(r, c) = complex_value(row[static_cast<std::size_t>(c)], rf);
        }
        return m;
    }

    OperatorSpec operator_spec(const YAML::Node& n, const std::string& field, bool hamiltonian) const {
        static const std::set<std::string> h_presets{"precession", "zero", "sigma_x", "sigma_y", "sigma_z"};
        static const std::set<std::string> l_presets{"sigma_x", "sigma_y", "sigma_z", "sigma_minus", "annihilation"};
        const auto& presets = hamiltonian ? h_presets : l_presets;
        OperatorSpec spec;
        YAML::Node name;
        if (n.IsScalar()) {
            name = n;
        } else {
            keys(n, field, {"preset", "omega", "dim", "matrix"});
            if (n["matrix"]) {
                if (n["preset"]) fail(n, field, "give either 'preset' or 'matrix', not both");
                spec.matrix = matrix(n["matrix"], field + ".matrix");
                return spec;
            }
            if (!n["preset"]) fail(n, field, "needs 'preset' or 'matrix'");
            name = n["preset"];
            if (n["omega"]) spec.omega = number(n["omega"], field + ".omega");
            if (n["dim"]) spec.dim = static_cast<int>(integer(n["dim"], field + ".dim", 1));
        }
        spec.preset = name.as<std::string>();
        if (!presets.count(spec.preset)) {
            std::string list;
            for (const auto& a : presets) list += (list.empty() ? "" : ", ") + a;
            fail(name, field, "unknown preset '" + spec.preset + "' (expected one of: " + list + ")");
        }
        if ((spec.preset == "annihilation" || spec.preset == "zero") && spec.dim < 1)
            fail(n, field, "preset '" + spec.preset + "' needs 'dim'");
        if (spec.preset == "annihilation" && spec.dim < 2) fail(n, field, "annihilation needs dim >= 2");
        if (spec.preset == "precession" && !(spec.omega > 0)) fail(n, field + ".omega", "omega must be positive");
        return spec;
    }

    ShiftSpec shift(const YAML::Node& n, const std::string& field) const {
        ShiftSpec s;
        if (n.IsMap()) {
            keys(n, field, {"spacing", "values"});
            if (!n["spacing"] || !n["values"]) fail(n, field, "piecewise shifts need 'spacing' and 'values'");
            s.spacing = number(n["spacing"], field + ".spacing");
            if (!(s.spacing > 0)) fail(n["spacing"], field + ".spacing", "must be positive");
            const auto vals = n["values"];
            if (!vals.IsSequence() || vals.size() == 0) fail(vals, field + ".values", "expected a non-empty list");
            for (std::size_t k = 0; k < vals.size(); ++k)
                s.values.push_back(complex_value(vals[k], field + ".values[" + std::to_string(k) + "]"));
            return s;
        }
        s.values.push_back(complex_value(n, field));
        return s;
    }

    std::vector<double> sweep_values(const YAML::Node& n, const std::string& field) const {
        std::vector<double> out;
        if (n.IsSequence()) {
            for (std::size_t k = 0; k < n.size(); ++k) out.push_back(number(n[k], field + "[" + std::to_string(k) + "]"));
        } else if (n.IsMap()) {
            keys(n, field, {"start", "stop", "points"});
            if (!n["start"] || !n["stop"] || !n["points"]) fail(n, field, "ranges need 'start', 'stop' and 'points'");
            const double a = number(n["start"], field + ".start");
            const double b = number(n["stop"], field + ".stop");
            const auto pts = integer(n["points"], field + ".points", 1);
            if (pts == 1) {
                out.push_back(a);
            } else {
                for (long long k = 0; k < pts; ++k) out.push_back(a + (b - a) * static_cast<double>(k) / (pts - 1));
            }
        } else {
            out.push_back(number(n, field));
        }
        if (out.empty()) fail(n, field, "sweep grid is empty");
        return out;
    }

private:
    std::string source_;
};

void emit_number(YAML::Emitter& e, double v) { e << format_double(v); }

void emit_complex(YAML::Emitter& e, cd v) {
    e << YAML::Flow << YAML::BeginSeq;
    emit_number(e, v.real());
    emit_number(e, v.imag());
    e << YAML::EndSeq;
}

void emit_operator(YAML::Emitter& e, const OperatorSpec& op) {
    e << YAML::BeginMap;
    if (op.preset.empty()) {
        e << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
        for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
            e << YAML::Flow << YAML::BeginSeq;
            for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) emit_complex(e, op.matrix(r, c));
            e << YAML::EndSeq;
        }
        e << YAML::EndSeq;
    } else {
        e << YAML::Key << "preset" << YAML::Value << op.preset;
        if (op.preset == "precession") {
            e << YAML::Key << "omega" << YAML::Value;
            emit_number(e, op.omega);
        }
        if (op.preset == "annihilation" || op.preset == "zero") e << YAML::Key << "dim" << YAML::Value << op.dim;
    }
    e << YAML::EndMap;
}

Operator build_operator(const OperatorSpec& spec) {
    if (spec.preset.empty()) return spec.matrix;
    if (spec.preset == "precession") return 0.5 * spec.omega * pauli(Axis::z);
    if (spec.preset == "zero") return Operator::Zero(spec.dim, spec.dim);
    if (spec.preset == "sigma_x") return pauli(Axis::x);
    if (spec.preset == "sigma_y") return pauli(Axis::y);
    if (spec.preset == "sigma_z") return pauli(Axis::z);
    if (spec.preset == "sigma_minus") return pauli(Axis::x) - I * pauli(Axis::y);
    if (spec.preset == "annihilation") return annihilation(spec.dim);
    throw ConfigError("", "unknown preset '" + spec.preset + "'");
}

}  // namespace

double parse_expression(const std::string& text) {
    if (text.empty()) throw InvalidArgument("empty expression");
    return ExpressionParser(text).parse();
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.msg, source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1));
    }
    const Reader rd(source);
    if (!root.IsMap()) throw ConfigError("", "top level must be a mapping", source);
    rd.keys(root, "<root>", {"model", "shifts", "initial_state", "run", "sweep"});

    ScenarioConfig cfg;
    const auto model = root["model"];
    if (!model) throw ConfigError("model", "missing section", source);
    rd.keys(model, "model", {"dim", "hamiltonian", "lindblad", "lambda"});
    if (model["dim"]) cfg.dim = static_cast<int>(rd.integer(model["dim"], "model.dim", 1));
    if (!model["hamiltonian"]) rd.fail(model, "model.hamiltonian", "missing");
    cfg.hamiltonian = rd.operator_spec(model["hamiltonian"], "model.hamiltonian", true);
    if (const auto ls = model["lindblad"]) {
        if (!ls.IsSequence()) rd.fail(ls, "model.lindblad", "expected a list");
        for (std::size_t k = 0; k < ls.size(); ++k)
            cfg.lindblads.push_back(rd.operator_spec(ls[k], "model.lindblad[" + std::to_string(k) + "]", false));
    }
    if (model["lambda"]) {
        cfg.lambda = rd.number(model["lambda"], "model.lambda");
        if (cfg.lambda < 0) rd.fail(model["lambda"], "model.lambda", "must be >= 0");
    }

    if (const auto sh = root["shifts"]) {
        if (!sh.IsSequence()) rd.fail(sh, "shifts", "expected one entry per Lindblad operator");
        for (std::size_t k = 0; k < sh.size(); ++k) cfg.shifts.push_back(rd.shift(sh[k], "shifts[" + std::to_string(k) + "]"));
        if (cfg.shifts.size() != cfg.lindblads.size())
            rd.fail(sh, "shifts", std::to_string(cfg.shifts.size()) + " shifts for " + std::to_string(cfg.lindblads.size()) +
                                      " Lindblad operators");
    }

    if (const auto st = root["initial_state"]) {
        rd.keys(st, "initial_state", {"theta", "phi", "amplitudes"});
        if (st["amplitudes"]) {
            if (st["theta"] || st["phi"]) rd.fail(st, "initial_state", "give Bloch angles or amplitudes, not both");
            cfg.initial_state.bloch = false;
            const auto amps = st["amplitudes"];
            if (!amps.IsSequence() || amps.size() == 0) rd.fail(amps, "initial_state.amplitudes", "expected a list");
            for (std::size_t k = 0; k < amps.size(); ++k)
                cfg.initial_state.amplitudes.push_back(
                    rd.complex_value(amps[k], "initial_state.amplitudes[" + std::to_string(k) + "]"));
        } else {
            if (st["theta"]) cfg.initial_state.angles.theta = rd.number(st["theta"], "initial_state.theta");
            if (st["phi"]) cfg.initial_state.angles.phi = rd.number(st["phi"], "initial_state.phi");
            const double th = cfg.initial_state.angles.theta;
            if (th < 0 || th > pi) rd.fail(st["theta"], "initial_state.theta", "must lie in [0, pi]");
        }
    }

    if (const auto run = root["run"]) {
        rd.keys(run, "run", {"T", "periods", "steps", "delta_t", "n_trajectories", "seed", "threads", "checkpoints"});
        auto& r = cfg.run;
        if (run["T"] && run["periods"]) rd.fail(run, "run", "give either 'T' or 'periods'");
        if (run["T"]) {
            r.T = rd.number(run["T"], "run.T");
            if (!(*r.T > 0)) rd.fail(run["T"], "run.T", "must be positive");
        }
        if (run["periods"]) {
            r.periods = rd.number(run["periods"], "run.periods");
            if (!(*r.periods > 0)) rd.fail(run["periods"], "run.periods", "must be positive");
        }
        if (run["steps"]) r.steps = static_cast<int>(rd.integer(run["steps"], "run.steps", 1));
        if (run["delta_t"]) {
            r.delta_t = rd.number(run["delta_t"], "run.delta_t");
            if (!(r.delta_t > 0)) rd.fail(run["delta_t"], "run.delta_t", "must be positive");
        }
        if (run["n_trajectories"]) r.n_trajectories = static_cast<int>(rd.integer(run["n_trajectories"], "run.n_trajectories", 1));
        if (run["seed"]) r.seed = static_cast<std::uint64_t>(rd.integer(run["seed"], "run.seed", 0));
        if (run["threads"]) r.threads = static_cast<int>(rd.integer(run["threads"], "run.threads", 0));
        if (run["checkpoints"]) r.checkpoints = static_cast<int>(rd.integer(run["checkpoints"], "run.checkpoints", 1));
    }

    if (const auto sw = root["sweep"]) {
        rd.keys(sw, "sweep", {"lambda", "f", "theta0", "omega", "T"});
        if (sw.size() > 2) rd.fail(sw, "sweep", "at most two swept parameters");
        for (const auto& kv : sw) {
            const auto name = kv.first.as<std::string>();
            cfg.sweep.push_back({name, rd.sweep_values(kv.second, "sweep." + name)});
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ScenarioConfig& cfg) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    if (cfg.dim > 0) e << YAML::Key << "dim" << YAML::Value << cfg.dim;
    e << YAML::Key << "hamiltonian" << YAML::Value;
    emit_operator(e, cfg.hamiltonian);
    e << YAML::Key << "lindblad" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : cfg.lindblads) emit_operator(e, l);
    e << YAML::EndSeq;
    e << YAML::Key << "lambda" << YAML::Value;
    emit_number(e, cfg.lambda);
    e << YAML::EndMap;

    if (!cfg.shifts.empty()) {
        e << YAML::Key << "shifts" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : cfg.shifts) {
            if (s.spacing > 0) {
                e << YAML::BeginMap << YAML::Key << "spacing" << YAML::Value;
                emit_number(e, s.spacing);
                e << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const cd v : s.values) emit_complex(e, v);
                e << YAML::EndSeq << YAML::EndMap;
            } else {
                emit_complex(e, s.values.front());
            }
        }
        e << YAML::EndSeq;
    }

    e << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
    if (cfg.initial_state.bloch) {
        e << YAML::Key << "theta" << YAML::Value;
        emit_number(e, cfg.initial_state.angles.theta);
        e << YAML::Key << "phi" << YAML::Value;
        emit_number(e, cfg.initial_state.angles.phi);
    } else {
        e << YAML::Key << "amplitudes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const cd v : cfg.initial_state.amplitudes) emit_complex(e, v);
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;

    const auto& r = cfg.run;
    e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    if (r.T) {
        e << YAML::Key << "T" << YAML::Value;
        emit_number(e, *r.T);
    }
    if (r.periods) {
        e << YAML::Key << "periods" << YAML::Value;
        emit_number(e, *r.periods);
    }
    e << YAML::Key << "steps" << YAML::Value << r.steps;
    e << YAML::Key << "delta_t" << YAML::Value;
    emit_number(e, r.delta_t);
    e << YAML::Key << "n_trajectories" << YAML::Value << r.n_trajectories;
    e << YAML::Key << "seed" << YAML::Value << r.seed;
    e << YAML::Key << "threads" << YAML::Value << r.threads;
    e << YAML::Key << "checkpoints" << YAML::Value << r.checkpoints;
    e << YAML::EndMap;

    if (!cfg.sweep.empty()) {
        e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        for (const auto& ax : cfg.sweep) {
            e << YAML::Key << ax.name << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double v : ax.values) emit_number(e, v);
            e << YAML::EndSeq;
        }
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string preset_path(const std::string& name) {
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            throw ConfigError("--preset", "invalid preset name '" + name + "'");
    }
    const std::string path = std::string(TRAJPHASE_PRESET_DIR) + "/" + name + ".yaml";
    if (!std::ifstream(path)) throw ConfigError("--preset", "no bundled preset named '" + name + "'");
    return path;
}

std::vector<std::vector<double>> sweep_points(const ScenarioConfig& cfg) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& ax : cfg.sweep) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out) {
            for (double v : ax.values) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        }
        out = std::move(next);
    }
    return out;
}

ScenarioConfig at_sweep_point(const ScenarioConfig& cfg, const std::vector<double>& point) {
    if (point.size() != cfg.sweep.size()) throw InvalidArgument("at_sweep_point: point does not match the sweep");
    ScenarioConfig out = cfg;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const auto& name = cfg.sweep[i].name;
        const double v = point[i];
        const std::string field = "sweep." + name;
        if (name == "lambda") {
            if (v < 0) throw ConfigError(field, "lambda must be >= 0");
            out.lambda = v;
        } else if (name == "f") {
            if (cfg.lindblads.empty()) throw ConfigError(field, "a shift needs at least one Lindblad operator");
            out.shifts.assign(cfg.lindblads.size(), ShiftSpec{{cd(v, 0.0)}, 0.0});
        } else if (name == "theta0") {
            if (!cfg.initial_state.bloch) throw ConfigError(field, "theta0 sweeps need a Bloch-angle initial state");
            if (v < 0 || v > pi) throw ConfigError(field, "theta0 must lie in [0, pi]");
            out.initial_state.angles.theta = v;
        } else if (name == "omega") {
            if (cfg.hamiltonian.preset != "precession") throw ConfigError(field, "omega sweeps need the precession Hamiltonian");
            if (!(v > 0)) throw ConfigError(field, "omega must be positive");
            out.hamiltonian.omega = v;
        } else if (name == "T") {
            if (!(v > 0)) throw ConfigError(field, "T must be positive");
            out.run.T = v;
            out.run.periods.reset();
        }
    }
    out.sweep.clear();
    return out;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
    Operator h = build_operator(cfg.hamiltonian);
    const auto d = h.rows();
    if (cfg.dim > 0 && cfg.dim != d)
        throw ConfigError("model.dim", "declared " + std::to_string(cfg.dim) + " but the Hamiltonian is " + std::to_string(d) + "x" + std::to_string(d));
    if (!is_hermitian(h, 1e-12)) throw ConfigError("model.hamiltonian", "matrix is not Hermitian");
    std::vector<Operator> ls;
    for (std::size_t k = 0; k < cfg.lindblads.size(); ++k) {
        Operator l = build_operator(cfg.lindblads[k]);
        if (l.rows() != d)
            throw ConfigError("model.lindblad[" + std::to_string(k) + "]",
                              "dimension " + std::to_string(l.rows()) + " does not match the Hamiltonian (" + std::to_string(d) + ")");
        ls.push_back(std::move(l));
    }

    ShiftSet shifts;
    if (!cfg.shifts.empty()) {
        if (cfg.shifts.size() != ls.size()) throw ConfigError("shifts", "one shift per Lindblad operator is required");
        for (const auto& s : cfg.shifts) {
            shifts.push_back(s.spacing > 0 ? ComplexSchedule::piecewise(s.values, s.spacing) : ComplexSchedule(s.values.front()));
        }
    }

    PureState psi0;
    if (cfg.initial_state.bloch) {
        if (d != 2) throw ConfigError("initial_state", "Bloch angles need a two-level model; give amplitudes instead");
        psi0 = state_from_bloch(cfg.initial_state.angles);
    } else {
        const auto& a = cfg.initial_state.amplitudes;
        if (static_cast<Eigen::Index>(a.size()) != d)
            throw ConfigError("initial_state.amplitudes", std::to_string(a.size()) + " amplitudes for dimension " + std::to_string(d));
        psi0 = PureState(d);
        for (Eigen::Index k = 0; k < d; ++k) psi0(k) = a[static_cast<std::size_t>(k)];
        if (psi0.norm() == 0.0) throw ConfigError("initial_state.amplitudes", "zero vector");
        psi0.normalize();
    }

    double T = 0.0;
    if (cfg.run.T) {
        T = *cfg.run.T;
    } else if (cfg.run.periods) {
        if (cfg.hamiltonian.preset != "precession") throw ConfigError("run.periods", "periods need the precession Hamiltonian");
        T = *cfg.run.periods * 2 * pi / cfg.hamiltonian.omega;
    } else {
        throw ConfigError("run.T", "missing (give 'T' or 'periods')");
    }

    for (const auto& s : shifts) {
        if (!s.covers(0.0, T)) throw ConfigError("shifts", "piecewise table ends at " + std::to_string(s.end()) + " before T");
    }

    try {
        return {LindbladModel(OperatorSchedule(std::move(h)), ls, cfg.lambda), std::move(shifts), std::move(psi0), T};
    } catch (const InvalidArgument& e) {
        throw ConfigError("model", e.what());
    }
}

std::optional<DephasingParams> as_dephasing(const ScenarioConfig& cfg) {
    if (cfg.hamiltonian.preset != "precession") return std::nullopt;
    if (cfg.lindblads.size() != 1 || cfg.lindblads.front().preset != "sigma_z") return std::nullopt;
    if (!cfg.initial_state.bloch) return std::nullopt;
    double f = 0.0;
    if (!cfg.shifts.empty()) {
        const auto& s = cfg.shifts.front();
        if (s.values.size() != 1 || s.spacing > 0 || s.values.front().imag() != 0.0) return std::nullopt;
        f = s.values.front().real();
    }
    DephasingParams p;
    p.omega = cfg.hamiltonian.omega;
    p.lambda = cfg.lambda;
    p.f = f;
    p.theta0 = cfg.initial_state.angles.theta;
    p.phi0 = cfg.initial_state.angles.phi;
    return p;
}

}  // namespace trajphase::cli
