#pragma once

#include <map>
#include <set>

#include "rnls/records.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Run configuration: sectioned key-value text, strict about unknown keys.
//
//   [grid]            dim, xmin, xmax, n (optionally xmin0/xmax0/n0 per axis)
//   [model]           p, beta, Omega, omega, omega_list, potential
//   [solver]          tau, stabilization, tol_step, tol_residual, max_iters,
//                     init, seed, workers
//   [experiment]      type, plus type-specific keys
//   [output]          dir, formats, write_fields
//
// Defaults follow the reference setup: box [-12,12]^d at 256 points/axis,
// tau = 0.01, tol_step = 1e-10, p = 3, beta = 1, harmonic(1,1).
// ---------------------------------------------------------------------------

enum class ExperimentType {
    none,
    solve,
    solve_energy,
    sweep,
    rates,
    omega_c,
    loop,
    scan,
    tf,
    lambda0,
    info
};

inline const char* experiment_name(ExperimentType t) {
    switch (t) {
        case ExperimentType::solve: return "solve";
        case ExperimentType::solve_energy: return "solve-energy";
        case ExperimentType::sweep: return "sweep";
        case ExperimentType::rates: return "rates";
        case ExperimentType::omega_c: return "omega-c";
        case ExperimentType::loop: return "loop";
        case ExperimentType::scan: return "scan";
        case ExperimentType::tf: return "tf";
        case ExperimentType::lambda0: return "lambda0";
        case ExperimentType::info: return "info";
        case ExperimentType::none: break;
    }
    return "none";
}

struct RunConfig {
    // grid
    int dim = 2;
    std::array<AxisSpec, 2> axes{AxisSpec{-12.0, 12.0, 256}, AxisSpec{-12.0, 12.0, 256}};
    // model
    ModelParams model;
    std::vector<double> omega_list;
    // solver
    SolverConfig solver;
    // experiment
    ExperimentType experiment = ExperimentType::none;
    double exp_mass = 0.0;          // solve-energy
    bool warm_start = false;        // sweep
    std::string rates_regime = "near";  // rates: near | far
    double window_lo = 0.0, window_hi = 0.0;
    double bracket_tol = 0.01;      // omega-c
    double omega_hi = 0.95;         // omega-c upper bracket endpoint
    double resolution = 1e-3;       // scan
    double mesh_step = 0.0;         // scan (0 -> 20x resolution)
    // output
    std::string out_dir = "out";
    std::vector<TableFormat> formats{TableFormat::csv};
    bool write_fields = true;

    GridPtr make_grid() const {
        std::vector<AxisSpec> v(axes.begin(), axes.begin() + dim);
        return Grid::make(v);
    }
};

namespace detail {

struct KvSections {
    std::map<std::string, std::map<std::string, std::string>> kv;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline KvSections parse_sections(const std::string& text) {
    KvSections out;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out.kv[section][key] = val;
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(where + ": not a number: '" + s + "'");
    }
}

inline long to_long(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(where + ": not an integer: '" + s + "'");
    }
}

inline bool to_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(where + ": not a boolean: '" + s + "'");
}

// fn(arg1,arg2,...) -> {fn, args}
inline std::pair<std::string, std::vector<std::string>> parse_call(const std::string& s,
                                                                   const std::string& where) {
    const auto lp = s.find('(');
    if (lp == std::string::npos) return {trim(s), {}};
    if (s.back() != ')') throw ConfigError(where + ": missing ')' in '" + s + "'");
    std::vector<std::string> args;
    std::string inner = s.substr(lp + 1, s.size() - lp - 2);
    // split on commas that are not nested inside parentheses
    int depth = 0;
    std::string cur;
    for (char ch : inner) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            args.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) args.push_back(trim(cur));
    return {trim(s.substr(0, lp)), args};
}

inline PotentialSpec parse_potential(const std::string& s, int dim) {
    auto [name, args] = parse_call(s, "model.potential");
    std::vector<double> c;
    for (const auto& a : args) c.push_back(to_double(a, "model.potential"));
    PotentialSpec spec;
    if (name == "harmonic") {
        spec = PotentialSpec{PotentialSpec::Kind::harmonic, c};
    } else if (name == "harmonic_lattice") {
        spec = PotentialSpec{PotentialSpec::Kind::harmonic_lattice, c};
    } else if (name == "harmonic_quartic") {
        spec = PotentialSpec{PotentialSpec::Kind::harmonic_quartic, c};
    } else {
        throw ConfigError("model.potential: unknown variant '" + name + "'");
    }
    spec.validate(dim);
    return spec;
}

inline std::vector<double> parse_omega_list(const std::string& s) {
    std::vector<double> out;
    const std::string t = trim(s);
    if (t.rfind("range(", 0) == 0) {
        auto [name, args] = parse_call(t, "model.omega_list");
        if (args.size() != 3)
            throw ConfigError("model.omega_list: range needs (start, stop, step)");
        const double start = to_double(args[0], "model.omega_list");
        const double stop = to_double(args[1], "model.omega_list");
        double step = to_double(args[2], "model.omega_list");
        if (step == 0.0) throw ConfigError("model.omega_list: zero step");
        if ((stop - start) * step < 0.0) step = -step;
        const double eps = 1e-9 * std::max(1.0, std::abs(step));
        if (step > 0.0)
            for (double w = start; w <= stop + eps; w += step) out.push_back(w);
        else
            for (double w = start; w >= stop - eps; w += step) out.push_back(w);
        return out;
    }
    std::string cur;
    std::istringstream is(t);
    while (std::getline(is, cur, ','))
        if (!trim(cur).empty()) out.push_back(to_double(trim(cur), "model.omega_list"));
    return out;
}

inline InitSpec parse_init(const std::string& s);

inline InitSpec parse_single_init(const std::string& s) {
    // optional trailing +noise(frac)
    std::string body = trim(s);
    double noise = 0.0;
    const auto plus = body.rfind("+noise(");
    if (plus != std::string::npos && body.back() == ')') {
        noise = to_double(body.substr(plus + 7, body.size() - plus - 8), "solver.init noise");
        body = trim(body.substr(0, plus));
    }
    auto [name, args] = parse_call(body, "solver.init");
    InitSpec spec;
    if (name == "gaussian") {
        spec = InitSpec::gaussian(args.size() > 0 ? to_double(args[0], "solver.init") : 1.0,
                                  args.size() > 1 ? to_double(args[1], "solver.init") : 1.0);
    } else if (name == "vortex") {
        if (args.empty()) throw ConfigError("solver.init: vortex needs a winding");
        spec = InitSpec::vortex(static_cast<int>(to_long(args[0], "solver.init")),
                                args.size() > 1 ? to_double(args[1], "solver.init") : 1.0,
                                args.size() > 2 ? to_double(args[2], "solver.init") : 1.0);
    } else if (name == "thomas_fermi") {
        spec = InitSpec::thomas_fermi();
    } else if (name == "file") {
        if (args.size() != 1) throw ConfigError("solver.init: file needs a path");
        spec = InitSpec::from_file(args[0]);
    } else if (name == "auto") {
        spec = InitSpec{};
    } else {
        throw ConfigError("solver.init: unknown variant '" + name + "'");
    }
    spec.noise_frac = noise;
    return spec;
}

inline InitSpec parse_init(const std::string& s) {
    const std::string t = trim(s);
    if (t.rfind("multistart(", 0) == 0) {
        if (t.back() != ')') throw ConfigError("solver.init: missing ')'");
        std::string inner = t.substr(11, t.size() - 12);
        std::vector<InitSpec> starts;
        int depth = 0;
        std::string cur;
        for (char ch : inner) {
            if (ch == '(') ++depth;
            if (ch == ')') --depth;
            if (ch == ';' && depth == 0) {
                starts.push_back(parse_single_init(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!trim(cur).empty()) starts.push_back(parse_single_init(cur));
        if (starts.empty()) throw ConfigError("solver.init: empty multistart");
        return InitSpec::multistart(std::move(starts));
    }
    return parse_single_init(t);
}

inline ExperimentType parse_experiment(const std::string& s) {
    static const std::map<std::string, ExperimentType> names = {
        {"solve", ExperimentType::solve},       {"solve-energy", ExperimentType::solve_energy},
        {"sweep", ExperimentType::sweep},       {"rates", ExperimentType::rates},
        {"omega-c", ExperimentType::omega_c},   {"loop", ExperimentType::loop},
        {"scan", ExperimentType::scan},         {"tf", ExperimentType::tf},
        {"lambda0", ExperimentType::lambda0},   {"info", ExperimentType::info}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("experiment.type: unknown experiment '" + s + "'");
    return it->second;
}

}  // namespace detail

/// Parse and validate a sectioned key-value configuration. Overrides (from
/// --set section.key=value) are applied before typed validation.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {}) {
    detail::KvSections sec = detail::parse_sections(text);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("--set expects section.key=value, got '" + ov + "'");
        sec.kv[detail::trim(ov.substr(0, dot))][detail::trim(ov.substr(dot + 1, eq - dot - 1))] =
            detail::trim(ov.substr(eq + 1));
    }

    static const std::map<std::string, std::set<std::string>> known = {
        {"grid", {"dim", "xmin", "xmax", "n", "xmin0", "xmax0", "n0", "xmin1", "xmax1", "n1"}},
        {"model", {"p", "beta", "Omega", "omega", "omega_list", "potential"}},
        {"solver",
         {"tau", "stabilization", "tol_step", "tol_residual", "tol_lambda", "max_iters", "init",
          "seed", "workers", "residual_check_interval", "tau_retries"}},
        {"experiment",
         {"type", "mass", "warm_start", "regime", "window_lo", "window_hi", "bracket_tol",
          "omega_hi", "resolution", "mesh_step"}},
        {"output", {"dir", "formats", "write_fields"}}};
    for (const auto& [s, keys] : sec.kv) {
        auto it = known.find(s);
        if (it == known.end()) throw ConfigError("config: unknown section [" + s + "]");
        for (const auto& [k, v] : keys)
            if (!it->second.count(k))
                throw ConfigError("config: unknown key '" + s + "." + k + "'");
    }

    RunConfig rc;
    auto get = [&](const std::string& s, const std::string& k) -> const std::string* {
        auto si = sec.kv.find(s);
        if (si == sec.kv.end()) return nullptr;
        auto ki = si->second.find(k);
        return ki == si->second.end() ? nullptr : &ki->second;
    };

    // grid
    if (const auto* v = get("grid", "dim")) rc.dim = static_cast<int>(detail::to_long(*v, "grid.dim"));
    if (rc.dim < 1 || rc.dim > 2) throw ConfigError("grid.dim: must be 1 or 2");
    if (const auto* v = get("grid", "xmin"))
        rc.axes[0].x_min = rc.axes[1].x_min = detail::to_double(*v, "grid.xmin");
    if (const auto* v = get("grid", "xmax"))
        rc.axes[0].x_max = rc.axes[1].x_max = detail::to_double(*v, "grid.xmax");
    if (const auto* v = get("grid", "n"))
        rc.axes[0].n = rc.axes[1].n = static_cast<std::size_t>(detail::to_long(*v, "grid.n"));
    for (int a = 0; a < 2; ++a) {
        const std::string sa = std::to_string(a);
        if (const auto* v = get("grid", "xmin" + sa))
            rc.axes[a].x_min = detail::to_double(*v, "grid.xmin" + sa);
        if (const auto* v = get("grid", "xmax" + sa))
            rc.axes[a].x_max = detail::to_double(*v, "grid.xmax" + sa);
        if (const auto* v = get("grid", "n" + sa))
            rc.axes[a].n = static_cast<std::size_t>(detail::to_long(*v, "grid.n" + sa));
    }

    // model (potential parsed after dim is known)
    rc.model.potential = PotentialSpec::harmonic(
        rc.dim == 1 ? std::vector<double>{1.0} : std::vector<double>{1.0, 1.0});
    if (const auto* v = get("model", "p")) rc.model.p = detail::to_double(*v, "model.p");
    if (const auto* v = get("model", "beta")) rc.model.beta = detail::to_double(*v, "model.beta");
    if (const auto* v = get("model", "Omega")) rc.model.Omega = detail::to_double(*v, "model.Omega");
    if (const auto* v = get("model", "omega")) rc.model.omega = detail::to_double(*v, "model.omega");
    if (const auto* v = get("model", "omega_list")) rc.omega_list = detail::parse_omega_list(*v);
    if (const auto* v = get("model", "potential"))
        rc.model.potential = detail::parse_potential(*v, rc.dim);

    // solver
    if (const auto* v = get("solver", "tau")) rc.solver.tau = detail::to_double(*v, "solver.tau");
    if (const auto* v = get("solver", "stabilization")) {
        if (*v == "auto") {
            rc.solver.stab_auto = true;
        } else {
            auto [name, args] = detail::parse_call(*v, "solver.stabilization");
            if (name != "fixed" || args.size() != 1)
                throw ConfigError("solver.stabilization: expected auto or fixed(alpha)");
            rc.solver.stab_auto = false;
            rc.solver.stab_alpha = detail::to_double(args[0], "solver.stabilization");
        }
    }
    if (const auto* v = get("solver", "tol_step"))
        rc.solver.tol_step = detail::to_double(*v, "solver.tol_step");
    if (const auto* v = get("solver", "tol_residual"))
        rc.solver.tol_residual = detail::to_double(*v, "solver.tol_residual");
    if (const auto* v = get("solver", "tol_lambda"))
        rc.solver.tol_lambda = detail::to_double(*v, "solver.tol_lambda");
    if (const auto* v = get("solver", "max_iters"))
        rc.solver.max_iters = detail::to_long(*v, "solver.max_iters");
    if (const auto* v = get("solver", "init")) rc.solver.init = detail::parse_init(*v);
    if (const auto* v = get("solver", "seed"))
        rc.solver.seed = static_cast<std::uint64_t>(detail::to_long(*v, "solver.seed"));
    if (const auto* v = get("solver", "workers"))
        rc.solver.workers = static_cast<int>(detail::to_long(*v, "solver.workers"));
    if (const auto* v = get("solver", "residual_check_interval"))
        rc.solver.residual_check_interval =
            static_cast<int>(detail::to_long(*v, "solver.residual_check_interval"));
    if (const auto* v = get("solver", "tau_retries"))
        rc.solver.tau_retries = static_cast<int>(detail::to_long(*v, "solver.tau_retries"));

    // experiment
    if (const auto* v = get("experiment", "type")) rc.experiment = detail::parse_experiment(*v);
    if (const auto* v = get("experiment", "mass")) rc.exp_mass = detail::to_double(*v, "experiment.mass");
    if (const auto* v = get("experiment", "warm_start"))
        rc.warm_start = detail::to_bool(*v, "experiment.warm_start");
    if (const auto* v = get("experiment", "regime")) {
        if (*v != "near" && *v != "far")
            throw ConfigError("experiment.regime: expected near or far");
        rc.rates_regime = *v;
    }
    if (const auto* v = get("experiment", "window_lo"))
        rc.window_lo = detail::to_double(*v, "experiment.window_lo");
    if (const auto* v = get("experiment", "window_hi"))
        rc.window_hi = detail::to_double(*v, "experiment.window_hi");
    if (const auto* v = get("experiment", "bracket_tol"))
        rc.bracket_tol = detail::to_double(*v, "experiment.bracket_tol");
    if (const auto* v = get("experiment", "omega_hi"))
        rc.omega_hi = detail::to_double(*v, "experiment.omega_hi");
    if (const auto* v = get("experiment", "resolution"))
        rc.resolution = detail::to_double(*v, "experiment.resolution");
    if (const auto* v = get("experiment", "mesh_step"))
        rc.mesh_step = detail::to_double(*v, "experiment.mesh_step");

    // output
    if (const auto* v = get("output", "dir")) rc.out_dir = *v;
    if (const auto* v = get("output", "formats")) {
        rc.formats.clear();
        std::istringstream is(*v);
        std::string item;
        while (std::getline(is, item, ',')) {
            item = detail::trim(item);
            if (item == "csv")
                rc.formats.push_back(TableFormat::csv);
            else if (item == "jsonl" || item == "json-lines")
                rc.formats.push_back(TableFormat::json_lines);
            else
                throw ConfigError("output.formats: unknown format '" + item + "'");
        }
        if (rc.formats.empty()) throw ConfigError("output.formats: empty");
    }
    if (const auto* v = get("output", "write_fields"))
        rc.write_fields = detail::to_bool(*v, "output.write_fields");

    // cross-field validation
    if (rc.experiment == ExperimentType::none)
        throw ConfigError("no experiment: set experiment.type (or use a CLI subcommand)");
    for (int a = 0; a < rc.dim; ++a) {
        if (!(rc.axes[a].x_max > rc.axes[a].x_min))
            throw ConfigError("grid: x_max must exceed x_min");
        if (rc.axes[a].n < 8 || rc.axes[a].n % 2 != 0)
            throw ConfigError("grid: points per axis must be even and >= 8");
    }
    if (!(rc.model.p > 1.0)) throw ConfigError("model.p: must satisfy p > 1");
    if (!(rc.model.beta > 0.0)) throw ConfigError("model.beta: must satisfy beta > 0 (defocusing)");
    rc.model.potential.validate(rc.dim);
    if (rc.dim == 1 && rc.model.Omega != 0.0)
        throw ConfigError("model.Omega: must be 0 for d = 1");
    const double om = rc.model.potential.omega_max(rc.dim);
    if (rc.dim == 2 && !(rc.model.Omega >= 0.0 && rc.model.Omega < om)) {
        std::ostringstream os;
        os << "model.Omega: must satisfy 0 <= Omega < Omega_max = " << om
           << " (rotation must not overcome the trap)";
        throw ConfigError(os.str());
    }
    rc.solver.validate();
    if (rc.experiment == ExperimentType::solve_energy && !(rc.exp_mass > 0.0))
        throw ConfigError("experiment.mass: solve-energy requires mass > 0");
    if (rc.solver.init.kind == InitSpec::Kind::file && !std::filesystem::exists(rc.solver.init.path))
        throw ConfigError("solver.init: file does not exist: " + rc.solver.init.path);
    for (const auto& s : rc.solver.init.starts)
        if (s.kind == InitSpec::Kind::file && !std::filesystem::exists(s.path))
            throw ConfigError("solver.init: file does not exist: " + s.path);
    return rc;
}

}  // namespace rnls
