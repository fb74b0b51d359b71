#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispeq/constants.hpp"
#include "dispeq/errors.hpp"

namespace dispeq {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// quantities with explicit units
//
// Physical values in config files are strings "VALUE UNIT" ("42.07 GHz",
// "0.0229 eV", "500 nm"). Bare numbers are accepted only for dimensionless
// fields and, for frequencies/lengths, in the normalized waveguide mode
// (unit suffix "normalized" is also accepted there).
// ---------------------------------------------------------------------------

enum class Dimension { frequency, length, time, energy_ev, magnetic_field, temperature, velocity };

namespace detail {

inline const std::map<std::string, double>& unit_table(Dimension d) {
    static const std::map<std::string, double> freq = {
        {"Hz", 2 * constants::pi},        {"kHz", 2 * constants::pi * 1e3},
        {"MHz", 2 * constants::pi * 1e6}, {"GHz", 2 * constants::pi * 1e9},
        {"THz", 2 * constants::pi * 1e12},{"rad/s", 1.0},
        {"krad/s", 1e3},                  {"Mrad/s", 1e6},
        {"Grad/s", 1e9},                  {"Trad/s", 1e12}};
    static const std::map<std::string, double> len = {
        {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
    static const std::map<std::string, double> tim = {
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
    static const std::map<std::string, double> ene = {{"eV", 1.0}, {"meV", 1e-3}};
    static const std::map<std::string, double> mag = {{"T", 1.0}, {"mT", 1e-3}};
    static const std::map<std::string, double> tem = {{"K", 1.0}};
    static const std::map<std::string, double> vel = {{"m/s", 1.0}, {"km/s", 1e3}};
    switch (d) {
        case Dimension::frequency: return freq;
        case Dimension::length: return len;
        case Dimension::time: return tim;
        case Dimension::energy_ev: return ene;
        case Dimension::magnetic_field: return mag;
        case Dimension::temperature: return tem;
        case Dimension::velocity: return vel;
    }
    return freq;
}

} // namespace detail

/// Parse "VALUE UNIT" into base units (rad/s, m, s, eV, T, K, m/s).
inline double parse_quantity(const json& j, Dimension dim, const std::string& path,
                             bool normalized_mode = false) {
    if (j.is_number()) {
        if (!normalized_mode)
            throw ConfigError(path + ": bare number; physical quantities need a unit suffix",
                              path);
        return j.get<double>();
    }
    if (!j.is_string())
        throw ConfigError(path + ": expected \"VALUE UNIT\" string", path);
    const std::string s = j.get<std::string>();
    std::istringstream in(s);
    double value;
    std::string unit;
    if (!(in >> value))
        throw ConfigError(path + ": cannot parse numeric value in '" + s + "'", path);
    in >> unit;
    if (unit.empty())
        throw ConfigError(path + ": missing unit in '" + s + "'", path);
    if (unit == "normalized" || unit == "norm") {
        if (!normalized_mode)
            throw ConfigError(path + ": normalized units are only valid in the waveguide mode",
                              path);
        return value;
    }
    const auto& table = detail::unit_table(dim);
    auto it = table.find(unit);
    if (it == table.end())
        throw ConfigError(path + ": unknown unit '" + unit + "'", path);
    return value * it->second;
}

inline double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number", path);
    return j.get<double>();
}

inline int require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer", path);
    return j.get<int>();
}

/// Reject keys outside the allowed set; diagnostics carry the dotted path.
inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object", path);
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + "." + it.key() + ": unknown key", path + "." + it.key());
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

struct WaveguideSection {
    double a = 2.0, b = 1.0;
    std::string model = "rational";  // "rational" | "constant"
    double strength = 15.0, pole = 16.0;
    double n_const = 1.0;
    std::vector<std::pair<int, int>> modes{{1, 1}, {2, 1}};
};

struct UniaxialSection {
    double eps_inf = 2.5;
    double omega_rx = 0, omega_ry = 0;  // rad/s
    std::string curvature = "index";    // "index" | "wavevector"
};

struct ScattererSection {
    std::string type = "pauli2";  // "pauli2" | "random_hermitian"
    double fx0 = constants::pi / 2;
    double fx_slope = 0.1;  // per unit normalized frequency
    double fx_curvature = 0.0;
    unsigned seed = 1;      // random_hermitian
    double strength = 1.0;  // random_hermitian
    int dim = 3;            // random_hermitian
};

struct GrapheneSection {
    std::string mu_c = "auto";  // "auto" or explicit quantity (kept raw for provenance)
    double mu_c_eV = 0;         // parsed when not auto
    double B0_T = 1.0;
    double tau_s = 0.2e-12;
    double T_K = 300.0;
    double v_F = 1e6;
    int flakes = 100;
    double stack_length = 500e-9;  // m
    std::vector<double> B0_grid;   // optional white-line grid, T
};

struct SolverSection {
    int k = 3;
    int m = 10;
    int seed_count = 64;
    double tolerance = 1e-10;
    std::string method = "reduced";  // "reduced" | "general"
    double bracket_lo = 2.5, bracket_hi = 3.5;  // rad/s or normalized
    std::optional<double> omega0;
};

struct SweepSection {
    double omega_min = 0, omega_max = 0;
    int points = 201;
};

struct PulseSection {
    double bandwidth = 0;  // rad/s or normalized
    int samples = 4096;
    int periods = 1;
};

struct RunConfig {
    bool normalized = false;  // waveguide (normalized units) vs uniaxial (SI)
    std::optional<WaveguideSection> waveguide;
    std::optional<UniaxialSection> uniaxial;
    std::optional<ScattererSection> scatterer;
    std::optional<GrapheneSection> graphene;
    SolverSection solver;
    std::optional<SweepSection> sweep;
    std::optional<PulseSection> pulse;
    std::vector<std::string> formats{"json", "csv"};
    std::string raw;          // original file contents (hashed for provenance)
    std::uint64_t hash = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.raw = text;
    cfg.hash = fnv1a64(text);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    check_keys(root, {"waveguide", "uniaxial", "scatterer", "graphene", "solver", "sweep",
                      "pulse", "output"},
               "config");
    const bool has_wg = root.contains("waveguide"), has_ux = root.contains("uniaxial");
    if (has_wg == has_ux)
        throw ConfigError("config: exactly one of 'waveguide' or 'uniaxial' is required");
    cfg.normalized = has_wg;

    if (has_wg) {
        const json& w = root["waveguide"];
        check_keys(w, {"a", "b", "model", "permittivity", "n", "modes"}, "waveguide");
        WaveguideSection s;
        if (w.contains("a")) s.a = require_number(w["a"], "waveguide.a");
        if (w.contains("b")) s.b = require_number(w["b"], "waveguide.b");
        if (w.contains("model")) s.model = w["model"].get<std::string>();
        if (w.contains("permittivity")) {
            check_keys(w["permittivity"], {"strength", "pole"}, "waveguide.permittivity");
            s.strength = require_number(w["permittivity"]["strength"],
                                        "waveguide.permittivity.strength");
            s.pole = require_number(w["permittivity"]["pole"], "waveguide.permittivity.pole");
        }
        if (w.contains("n")) {
            s.n_const = require_number(w["n"], "waveguide.n");
            if (!w.contains("model")) s.model = "constant";
        }
        if (w.contains("modes")) {
            s.modes.clear();
            if (!w["modes"].is_array()) throw ConfigError("waveguide.modes: expected array");
            for (size_t i = 0; i < w["modes"].size(); ++i) {
                const json& mj = w["modes"][i];
                if (!mj.is_array() || mj.size() != 2)
                    throw ConfigError("waveguide.modes[" + std::to_string(i) +
                                      "]: expected [l, j]");
                s.modes.emplace_back(require_int(mj[0], "waveguide.modes.l"),
                                     require_int(mj[1], "waveguide.modes.j"));
            }
            if (s.modes.size() < 2) throw ConfigError("waveguide.modes: need at least 2 modes");
        }
        cfg.waveguide = s;
    } else {
        const json& u = root["uniaxial"];
        check_keys(u, {"eps_inf", "omega_rx", "omega_ry", "curvature"}, "uniaxial");
        UniaxialSection s;
        s.eps_inf = require_number(u.at("eps_inf"), "uniaxial.eps_inf");
        s.omega_rx = parse_quantity(u.at("omega_rx"), Dimension::frequency, "uniaxial.omega_rx");
        s.omega_ry = parse_quantity(u.at("omega_ry"), Dimension::frequency, "uniaxial.omega_ry");
        if (u.contains("curvature")) {
            s.curvature = u["curvature"].get<std::string>();
            if (s.curvature != "index" && s.curvature != "wavevector")
                throw ConfigError("uniaxial.curvature: must be 'index' or 'wavevector'");
        }
        cfg.uniaxial = s;
    }

    if (root.contains("scatterer")) {
        const json& sc = root["scatterer"];
        check_keys(sc, {"type", "fx0", "fx_slope", "fx_curvature", "seed", "strength", "dim"},
                   "scatterer");
        ScattererSection s;
        if (sc.contains("type")) s.type = sc["type"].get<std::string>();
        if (s.type != "pauli2" && s.type != "random_hermitian")
            throw ConfigError("scatterer.type: must be 'pauli2' or 'random_hermitian'");
        if (sc.contains("fx0")) s.fx0 = require_number(sc["fx0"], "scatterer.fx0");
        if (sc.contains("fx_slope")) s.fx_slope = require_number(sc["fx_slope"], "scatterer.fx_slope");
        if (sc.contains("fx_curvature"))
            s.fx_curvature = require_number(sc["fx_curvature"], "scatterer.fx_curvature");
        if (sc.contains("seed")) s.seed = static_cast<unsigned>(require_int(sc["seed"], "scatterer.seed"));
        if (sc.contains("strength")) s.strength = require_number(sc["strength"], "scatterer.strength");
        if (sc.contains("dim")) s.dim = require_int(sc["dim"], "scatterer.dim");
        cfg.scatterer = s;
    }

    if (root.contains("graphene")) {
        const json& g = root["graphene"];
        check_keys(g, {"mu_c", "B0", "tau", "temperature", "v_F", "flakes", "stack_length",
                       "B0_grid"},
                   "graphene");
        GrapheneSection s;
        if (g.contains("mu_c")) {
            if (g["mu_c"].is_string() && g["mu_c"].get<std::string>() == "auto") {
                s.mu_c = "auto";
            } else {
                s.mu_c = "explicit";
                s.mu_c_eV = parse_quantity(g["mu_c"], Dimension::energy_ev, "graphene.mu_c");
            }
        }
        if (g.contains("B0"))
            s.B0_T = parse_quantity(g["B0"], Dimension::magnetic_field, "graphene.B0");
        if (g.contains("tau")) s.tau_s = parse_quantity(g["tau"], Dimension::time, "graphene.tau");
        if (g.contains("temperature"))
            s.T_K = parse_quantity(g["temperature"], Dimension::temperature,
                                   "graphene.temperature");
        if (g.contains("v_F"))
            s.v_F = parse_quantity(g["v_F"], Dimension::velocity, "graphene.v_F");
        if (g.contains("flakes")) s.flakes = require_int(g["flakes"], "graphene.flakes");
        if (g.contains("stack_length"))
            s.stack_length =
                parse_quantity(g["stack_length"], Dimension::length, "graphene.stack_length");
        if (g.contains("B0_grid")) {
            if (!g["B0_grid"].is_array()) throw ConfigError("graphene.B0_grid: expected array");
            for (size_t i = 0; i < g["B0_grid"].size(); ++i)
                s.B0_grid.push_back(parse_quantity(g["B0_grid"][i], Dimension::magnetic_field,
                                                   "graphene.B0_grid[" + std::to_string(i) + "]"));
        }
        cfg.graphene = s;
    }

    if (root.contains("solver")) {
        const json& so = root["solver"];
        check_keys(so, {"k", "m", "seed_count", "tolerance", "method", "bracket", "omega0"},
                   "solver");
        if (so.contains("k")) cfg.solver.k = require_int(so["k"], "solver.k");
        if (so.contains("m")) cfg.solver.m = require_int(so["m"], "solver.m");
        if (so.contains("seed_count"))
            cfg.solver.seed_count = require_int(so["seed_count"], "solver.seed_count");
        if (so.contains("tolerance"))
            cfg.solver.tolerance = require_number(so["tolerance"], "solver.tolerance");
        if (so.contains("method")) {
            cfg.solver.method = so["method"].get<std::string>();
            if (cfg.solver.method != "reduced" && cfg.solver.method != "general")
                throw ConfigError("solver.method: must be 'reduced' or 'general'");
        }
        if (so.contains("bracket")) {
            const json& br = so["bracket"];
            if (!br.is_array() || br.size() != 2)
                throw ConfigError("solver.bracket: expected [lo, hi]");
            cfg.solver.bracket_lo =
                parse_quantity(br[0], Dimension::frequency, "solver.bracket[0]", cfg.normalized);
            cfg.solver.bracket_hi =
                parse_quantity(br[1], Dimension::frequency, "solver.bracket[1]", cfg.normalized);
        }
        if (so.contains("omega0"))
            cfg.solver.omega0 =
                parse_quantity(so["omega0"], Dimension::frequency, "solver.omega0", cfg.normalized);
    }

    if (root.contains("sweep")) {
        const json& sw = root["sweep"];
        check_keys(sw, {"omega_min", "omega_max", "points"}, "sweep");
        SweepSection s;
        s.omega_min =
            parse_quantity(sw.at("omega_min"), Dimension::frequency, "sweep.omega_min", cfg.normalized);
        s.omega_max =
            parse_quantity(sw.at("omega_max"), Dimension::frequency, "sweep.omega_max", cfg.normalized);
        if (sw.contains("points")) s.points = require_int(sw["points"], "sweep.points");
        if (s.points < 2 || s.omega_max <= s.omega_min)
            throw ConfigError("sweep: needs omega_max > omega_min and points >= 2");
        cfg.sweep = s;
    }

    if (root.contains("pulse")) {
        const json& p = root["pulse"];
        check_keys(p, {"bandwidth", "samples", "periods"}, "pulse");
        PulseSection s;
        s.bandwidth =
            parse_quantity(p.at("bandwidth"), Dimension::frequency, "pulse.bandwidth", cfg.normalized);
        if (p.contains("samples")) s.samples = require_int(p["samples"], "pulse.samples");
        if (p.contains("periods")) s.periods = require_int(p["periods"], "pulse.periods");
        cfg.pulse = s;
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, {"formats"}, "output");
        if (o.contains("formats")) {
            cfg.formats.clear();
            for (const auto& f : o["formats"]) cfg.formats.push_back(f.get<std::string>());
        }
    }
    return cfg;
}

} // namespace dispeq
