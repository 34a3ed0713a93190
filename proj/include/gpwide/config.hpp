#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpwide/expr.hpp"
#include "gpwide/problem.hpp"

namespace gpwide {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    enum class Mode { Wide, Parabolic, Both };
    Mode mode = Mode::Both;
    std::vector<double> eps_list;
    double T = 1.0;
    double dt = 1e-3;       // parabolic step
    int N = 64;             // spatial cells per axis
    double tol = 1e-7;      // minimizer projected-gradient tolerance
    int max_iters = 50000;
    std::string out_dir = "out";
    double delta = 0.1;     // interior-window margin for diagnostics
    double tau = 1.0;       // diagnostic window length
    double theta = 0.5;     // diffusion time weighting of the parabolic stepper
    int record_stride = 1;
    int validate_density = 9;
    double tail_tol = 1e-8;   // weighted-tail tolerance fixing T_max per eps
    double dt_eps_ratio = 0.25;  // wide-grid step: dt = ratio * eps

    static Mode parse_mode(const std::string& s) {
        if (s == "wide") return Mode::Wide;
        if (s == "parabolic") return Mode::Parabolic;
        if (s == "both") return Mode::Both;
        throw ConfigError("unknown mode '" + s + "' (expected wide|parabolic|both)");
    }
    static std::string mode_name(Mode m) {
        switch (m) {
            case Mode::Wide: return "wide";
            case Mode::Parabolic: return "parabolic";
            case Mode::Both: return "both";
        }
        return "both";
    }
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

class ConfigMap {
public:
    void insert(const std::string& section, const std::string& key, const std::string& value,
                int line) {
        entries_[section + "." + key] = ConfigEntry{value, line, false};
    }

    const ConfigEntry* find(const std::string& section, const std::string& key) const {
        const auto it = entries_.find(section + "." + key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::string require(const std::string& section, const std::string& key) const {
        const ConfigEntry* e = find(section, key);
        if (!e) throw ConfigError("missing required key '" + key + "' in section [" + section + "]");
        return e->value;
    }

    std::optional<std::string> optional(const std::string& section, const std::string& key) const {
        const ConfigEntry* e = find(section, key);
        if (!e) return std::nullopt;
        return e->value;
    }

    void check_all_used() const {
        for (const auto& [full_key, entry] : entries_) {
            if (!entry.used)
                throw ConfigError("unknown key '" + full_key + "' (line " +
                                  std::to_string(entry.line) + ")");
        }
    }

private:
    std::map<std::string, ConfigEntry> entries_;
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

inline double parse_real(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse '" + s + "' as a real number for " + what);
    }
}

inline int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse '" + s + "' as an integer for " + what);
    }
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        out.push_back(parse_real(tok, what));
    }
    if (out.empty()) throw ConfigError(what + " must contain at least one value");
    return out;
}

inline ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ConfigMap map;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "coefficients" && section != "run")
                throw ConfigError("unknown section [" + section + "] at line " +
                                  std::to_string(lineno));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' at line " + std::to_string(lineno));
        if (section.empty())
            throw ConfigError("key outside of any section at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("empty key or value at line " + std::to_string(lineno));
        map.insert(section, key, value, lineno);
    }
    return map;
}

inline void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        const std::size_t dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value, got '" + ov + "'");
        map.insert(trim(ov.substr(0, dot)), trim(ov.substr(dot + 1, eq - dot - 1)),
                   trim(ov.substr(eq + 1)), 0);
    }
}

inline CoefficientExpr parse_coeff(const ConfigMap& map, const std::string& key,
                                   const std::string& vars, const std::string& fallback) {
    const auto raw = map.optional("coefficients", key);
    const std::string src = raw ? strip_quotes(*raw) : fallback;
    try {
        return CoefficientExpr::parse(src, vars);
    } catch (const ParseError& e) {
        throw ConfigError("coefficient '" + key + "': " + e.what());
    }
}

}  // namespace detail

/// Parses the flat key = value config with sections [problem], [coefficients]
/// and [run], builds the problem and run options, validates the structural
/// hypotheses by sampling, and refuses any epsilon at or above the
/// admissibility threshold. No output is written here; rejection is total.
inline std::pair<ProblemSpec, RunOptions> load_config(
    const std::string& path, const std::vector<std::string>& overrides = {}) {
    detail::ConfigMap map = detail::read_config_file(path);
    detail::apply_overrides(map, overrides);

    ProblemSpec spec;
    spec.k = detail::parse_int(map.require("problem", "k"), "k");
    if (spec.k < 1) throw ConfigError("k must be >= 1");

    const auto dom_vals = detail::parse_real_list(map.require("problem", "domain"), "domain");
    if (dom_vals.size() == 2)
        spec.domain = Domain::interval(dom_vals[0], dom_vals[1]);
    else if (dom_vals.size() == 4)
        spec.domain = Domain::rectangle(dom_vals[0], dom_vals[1], dom_vals[2], dom_vals[3]);
    else
        throw ConfigError("domain must list 2 (interval) or 4 (rectangle) numbers");

    if (const auto bm = map.optional("problem", "boundary_mode")) {
        if (*bm == "dirichlet_trace")
            spec.boundary_mode = BoundaryMode::DirichletTrace;
        else if (*bm == "free")
            spec.boundary_mode = BoundaryMode::Free;
        else
            throw ConfigError("boundary_mode must be dirichlet_trace or free");
    }

    GrowthConstants& g = spec.growth;
    auto real_or = [&](const char* key, double fallback) {
        const auto v = map.optional("problem", key);
        return v ? detail::parse_real(*v, key) : fallback;
    };
    g.A1 = real_or("A1", 0.0);
    g.A2 = real_or("A2", 0.0);
    g.H1 = real_or("H1", 0.0);
    g.H2 = real_or("H2", 0.0);
    g.C1 = real_or("C1", 0.0);
    g.C2 = real_or("C2", 0.0);
    g.D1 = real_or("D1", 1.0);
    g.D2 = real_or("D2", 0.0);
    g.D3 = real_or("D3", 0.0);
    g.R1 = real_or("R1", 1.0);
    g.R2 = real_or("R2", 1.0);
    g.norm_U1U3 = real_or("norm_U1U3", spec.domain.measure());
    g.norm_U2 = real_or("norm_U2", spec.domain.measure());
    if (const auto v = map.optional("problem", "mu_bar"))
        spec.mu_bar = detail::parse_real(*v, "mu_bar");
    if (const auto v = map.optional("problem", "mu")) spec.mu = detail::parse_real(*v, "mu");
    if (const auto v = map.optional("problem", "D4")) spec.D4 = detail::parse_real(*v, "D4");

    spec.a.assign(static_cast<std::size_t>(spec.k) * spec.k, CoefficientExpr::number(0.0));
    for (int i = 0; i < spec.k; ++i)
        for (int j = 0; j < spec.k; ++j) {
            if (i == j) continue;
            const std::string key =
                "a_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            spec.a[static_cast<std::size_t>(i) * spec.k + j] = detail::parse_coeff(map, key, "tx", "0");
        }
    spec.beta = detail::parse_coeff(map, "beta", "tx", "0");
    spec.rho = detail::parse_coeff(map, "rho", "t", "0");
    for (int i = 0; i < spec.k; ++i) {
        const std::string suffix = "_" + std::to_string(i + 1);
        spec.d.push_back(detail::parse_coeff(map, "d" + suffix, "t", "1"));
        spec.r.push_back(detail::parse_coeff(map, "r" + suffix, "x", "1"));
        spec.f.push_back(detail::parse_coeff(map, "f" + suffix, "txs", "0"));
        const auto v0 = map.optional("coefficients", "v0" + suffix);
        if (!v0) throw ConfigError("missing required key 'v0" + suffix + "' in section [coefficients]");
        try {
            spec.v0.push_back(CoefficientExpr::parse(detail::strip_quotes(*v0), "x"));
        } catch (const ParseError& e) {
            throw ConfigError("coefficient 'v0" + suffix + "': " + e.what());
        }
    }
    if (map.optional("coefficients", "b_lower"))
        spec.b_lower = detail::parse_coeff(map, "b_lower", "t", "0");
    if (map.optional("coefficients", "U1")) spec.U1 = detail::parse_coeff(map, "U1", "x", "1");
    if (map.optional("coefficients", "U2")) spec.U2 = detail::parse_coeff(map, "U2", "x", "1");
    if (map.optional("coefficients", "U3")) spec.U3 = detail::parse_coeff(map, "U3", "x", "1");

    RunOptions opts;
    if (const auto v = map.optional("run", "mode")) opts.mode = RunOptions::parse_mode(*v);
    if (const auto v = map.optional("run", "eps_list"))
        opts.eps_list = detail::parse_real_list(*v, "eps_list");
    else if (const auto e = map.optional("run", "epsilon"))
        opts.eps_list = {detail::parse_real(*e, "epsilon")};
    auto run_real = [&](const char* key, double fallback) {
        const auto v = map.optional("run", key);
        return v ? detail::parse_real(*v, key) : fallback;
    };
    auto run_int = [&](const char* key, int fallback) {
        const auto v = map.optional("run", key);
        return v ? detail::parse_int(*v, key) : fallback;
    };
    opts.T = run_real("T", opts.T);
    opts.dt = run_real("dt", opts.dt);
    opts.N = run_int("N", opts.N);
    opts.tol = run_real("tol", opts.tol);
    opts.max_iters = run_int("max_iters", opts.max_iters);
    if (const auto v = map.optional("run", "out_dir")) opts.out_dir = *v;
    opts.delta = run_real("delta", opts.delta);
    opts.tau = run_real("tau", opts.tau);
    opts.theta = run_real("theta", opts.theta);
    opts.record_stride = run_int("record_stride", opts.record_stride);
    opts.validate_density = run_int("validate_density", opts.validate_density);
    opts.tail_tol = run_real("tail_tol", opts.tail_tol);
    opts.dt_eps_ratio = run_real("dt_eps_ratio", opts.dt_eps_ratio);

    map.check_all_used();

    if (!(opts.T > 0) || !(opts.dt > 0) || !(opts.tol > 0))
        throw ConfigError("T, dt and tol must be positive");
    if (opts.N < 2 || opts.max_iters < 1)
        throw ConfigError("N must be >= 2 and max_iters >= 1");
    if (!(opts.theta >= 0.5) || opts.theta > 1.0)
        throw ConfigError("theta must lie in [0.5, 1]");
    if (opts.record_stride < 1) throw ConfigError("record_stride must be >= 1");

    spec.check_shape();

    const double eb = epsilon_bar(spec.growth);
    if (opts.mode != RunOptions::Mode::Parabolic && opts.eps_list.empty())
        throw ConfigError("missing required key 'eps_list' in section [run]");
    for (std::size_t i = 0; i < opts.eps_list.size(); ++i) {
        const double eps = opts.eps_list[i];
        if (!(eps > 0) || eps >= eb) {
            std::ostringstream os;
            os << "epsilon = " << eps << " rejected: admissibility requires epsilon < "
               << "1/(2(A2+H2+C2+D2+1)) = " << eb;
            throw ConfigError(os.str());
        }
        if (i > 0 && !(eps < opts.eps_list[i - 1]))
            throw ConfigError("eps_list must be strictly decreasing");
    }

    const ValidationReport report = validate_problem(spec, opts.validate_density);
    if (!report.passed) throw ConfigError("problem validation failed:\n" + report.summary());

    return {std::move(spec), std::move(opts)};
}

}  // namespace gpwide
