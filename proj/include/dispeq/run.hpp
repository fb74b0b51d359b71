#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dispeq/config.hpp"
#include "dispeq/dispersion.hpp"
#include "dispeq/graphene.hpp"
#include "dispeq/placement.hpp"
#include "dispeq/pulse.hpp"
#include "dispeq/residual_fit.hpp"
#include "dispeq/stack.hpp"
#include "dispeq/transfer.hpp"
#include "dispeq/uniaxial.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// deterministic result records
//
// Records are flat ordered key/value documents serialized as JSON with every
// float printed at 17 significant digits, so identical configs produce
// byte-identical payloads.
// ---------------------------------------------------------------------------

struct Record {
    std::vector<std::pair<std::string, std::string>> items;

    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    void put(const std::string& k, double v) { items.emplace_back(k, fmt(v)); }
    void put(const std::string& k, int v) { items.emplace_back(k, std::to_string(v)); }
    void put(const std::string& k, bool v) { items.emplace_back(k, v ? "true" : "false"); }
    void put(const std::string& k, const std::string& v) {
        items.emplace_back(k, "\"" + v + "\"");
    }
    void put(const std::string& k, const std::vector<double>& v) {
        std::string s = "[";
        for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
        items.emplace_back(k, s + "]");
    }
    std::string serialize() const {
        std::string s = "{\n";
        for (size_t i = 0; i < items.size(); ++i) {
            s += "  \"" + items[i].first + "\": " + items[i].second;
            s += (i + 1 < items.size()) ? ",\n" : "\n";
        }
        return s + "}\n";
    }
};

struct Table {
    std::string name;     // file stem and version tag
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string serialize() const {
        std::string s = "# dispeq." + name + ".v1\n";
        for (size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
        s += "\n";
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + Record::fmt(r[i]);
            s += "\n";
        }
        return s;
    }
};

struct ResultBundle {
    Record record;
    std::vector<Table> tables;
};

inline void stamp_provenance(Record& rec, const RunConfig& cfg, const std::string& kind) {
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(cfg.hash));
    rec.put("format", "dispeq." + kind + ".v1");
    rec.put("config_hash", std::string(hex));
    rec.put("constants", std::string(constants::version));
    rec.put("seed_count", cfg.solver.seed_count);
}

inline void write_bundle(const ResultBundle& bundle, const std::string& dir,
                         const std::string& record_name) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(fs::path(dir) / (record_name + ".json"), std::ios::binary);
        f << bundle.record.serialize();
    }
    for (const auto& t : bundle.tables) {
        std::ofstream f(fs::path(dir) / (t.name + ".csv"), std::ios::binary);
        f << t.serialize();
    }
}

// ---------------------------------------------------------------------------
// config -> physics objects
// ---------------------------------------------------------------------------

namespace detail {

inline RefractionModel model_of(const WaveguideSection& w) {
    if (w.model == "constant") return ConstantIndex{w.n_const};
    if (w.model == "rational") return RationalPermittivity{w.strength, w.pole};
    throw ConfigError("waveguide.model: must be 'rational' or 'constant'");
}

inline std::vector<DispersionLaw> laws_of(const WaveguideSection& w) {
    WaveguideGeometry geom(w.a, w.b);
    RefractionModel model = model_of(w);
    std::vector<DispersionLaw> laws;
    for (auto [l, j] : w.modes) laws.push_back(make_mode_law(geom, model, l, j));
    return laws;
}

inline ScattererSpec scatterer_of(const ScattererSection& s, double w0) {
    if (s.type == "pauli2") {
        Pauli2Scatterer p;
        p.w0 = w0;
        p.fx_taylor = {s.fx0, s.fx_slope, s.fx_curvature};
        return p;
    }
    // deterministic synthetic Hermitian action: H0 + (w - w0) H1
    std::mt19937 rng(s.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto hermitian = [&](double scale) {
        MatrixXcd h(s.dim, s.dim);
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j) h(i, j) = complexd(u(rng), u(rng));
        return MatrixXcd(0.5 * scale * (h + h.adjoint()).eval());
    };
    MatrixXcd H0 = hermitian(s.strength);
    MatrixXcd H1 = hermitian(s.strength * 0.2);
    GenericNScatterer g;
    g.n = s.dim;
    g.action = [H0, H1, w0](double w) { return MatrixXcd(H0 + (w - w0) * H1); };
    return g;
}

inline UniaxialMedium medium_of(const UniaxialSection& u, double omega_p) {
    return UniaxialMedium(u.eps_inf, omega_p, u.omega_rx, u.omega_ry);
}

inline GrapheneFlake flake_of(const GrapheneSection& g) {
    GrapheneFlake f;
    f.mu_c_eV = g.mu_c_eV;
    f.B0_T = g.B0_T;
    f.tau_s = g.tau_s;
    f.T_K = g.T_K;
    f.v_F = g.v_F;
    return f;
}

} // namespace detail

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

/// design-waveguide: locate the zero-curvature operating point and emit the
/// F_I / F_z Taylor tables.
inline ResultBundle cmd_design_waveguide(const RunConfig& cfg) {
    if (!cfg.waveguide) throw ConfigError("design-waveguide: needs the 'waveguide' section");
    auto laws = detail::laws_of(*cfg.waveguide);
    if (laws.size() < 2) throw ConfigError("design-waveguide: needs two modes");
    auto zc = find_zero_curvature_frequency(laws[0], laws[1], cfg.solver.bracket_lo,
                                            cfg.solver.bracket_hi);
    auto mp = mode_pair_coefficients(laws[0], laws[1], zc.omega0, cfg.solver.k);

    ResultBundle out;
    stamp_provenance(out.record, cfg, "design-waveguide");
    out.record.put("omega0", zc.omega0);
    out.record.put("degenerate", zc.degenerate);
    out.record.put("FI", mp.fi_taylor[0]);
    out.record.put("FZ", mp.fz_taylor[0]);
    out.record.put("FI_taylor", mp.fi_taylor);
    out.record.put("FZ_taylor", mp.fz_taylor);
    return out;
}

/// solve: reduced or general scatterer placement.
inline ResultBundle cmd_solve(const RunConfig& cfg) {
    if (!cfg.waveguide) throw ConfigError("solve: needs the 'waveguide' section");
    auto laws = detail::laws_of(*cfg.waveguide);
    double w0;
    if (cfg.solver.omega0) {
        w0 = *cfg.solver.omega0;
    } else {
        w0 = find_zero_curvature_frequency(laws[0], laws[1], cfg.solver.bracket_lo,
                                           cfg.solver.bracket_hi)
                 .omega0;
    }

    ResultBundle out;
    stamp_provenance(out.record, cfg, "solution");
    out.record.put("omega0", w0);
    out.record.put("method", cfg.solver.method);

    MultiStartOptions opts;
    opts.seed_count = cfg.solver.seed_count;
    opts.tol = cfg.solver.tolerance;

    if (cfg.solver.method == "reduced") {
        auto mp = mode_pair_coefficients(laws[0], laws[1], w0, cfg.solver.k);
        PlacementSolution sol = solve_reduced(cfg.solver.m, mp.fi0(), mp.fz0(), opts);
        out.record.put("m", cfg.solver.m);
        out.record.put("FI", mp.fi0());
        out.record.put("FZ", mp.fz0());
        out.record.put("X", sol.X);
        out.record.put("L", sol.L);
        out.record.put("sum_X", sol.X[0] + sol.X[1] + sol.X[2]);
        out.record.put("sum_L", sol.sum_L);
        out.record.put("period", 2 * sol.sum_L);
        out.record.put("winding", sol.winding_value);
        std::vector<double> res(sol.residuals.data(), sol.residuals.data() + sol.residuals.size());
        out.record.put("residuals", res);
        out.record.put("iterations", sol.iterations);
        out.record.put("seed_index", sol.seed_index);
        return out;
    }

    // general path
    PlacementProblem prob;
    if (laws.size() == 2) {
        prob.modes = mode_pair_coefficients(laws[0], laws[1], w0, cfg.solver.k + 1);
    } else {
        prob.modes = PhaseGenerator(laws);
    }
    ScattererSection ss = cfg.scatterer.value_or(ScattererSection{});
    if (ss.type == "random_hermitian") ss.dim = static_cast<int>(laws.size());
    prob.scatterer = detail::scatterer_of(ss, w0);
    prob.w0 = w0;
    prob.k = cfg.solver.k;
    if (cfg.solver.m > 0) prob.winding_m = cfg.solver.m;
    opts.tol = std::max(cfg.solver.tolerance, 1e-8);
    PlacementSolution sol = solve_general(prob, opts);
    out.record.put("N", static_cast<int>(laws.size()));
    out.record.put("k", cfg.solver.k);
    out.record.put("L", sol.L);
    out.record.put("sum_L", sol.sum_L);
    out.record.put("winding", sol.winding_value);
    std::vector<double> res(sol.residuals.data(), sol.residuals.data() + sol.residuals.size());
    out.record.put("residuals", res);
    out.record.put("max_residual", sol.residuals.cwiseAbs().maxCoeff());
    out.record.put("iterations", sol.iterations);
    out.record.put("seed_index", sol.seed_index);
    out.record.put("degenerate_satisfied", sol.degenerate_satisfied);
    return out;
}

namespace detail {

/// Rebuild the solved two-mode structure sweep from config + solution record.
struct SolvedStructure {
    ModePairCoefficients mp;
    ScattererSpec spec;
    std::vector<double> L;
    double w0;

    TransferMatrix period_squared_full(double w) const {
        CompositeResult c = composite_matrix(L, spec, mp, w, 2);
        return TransferMatrix(c.full());
    }
    Eigen::Matrix2cd period_full_2x2(double w) const {
        CompositeResult c = composite_matrix(L, spec, mp, w, 2);
        return Eigen::Matrix2cd(c.full());
    }
    Eigen::Matrix2cd bare_2x2(double w) const {
        const double total = 2 * (L[0] + L[1] + L[2]);
        Eigen::Matrix2cd m;
        const double fi = mp.FI(w), fz = mp.FZ(w);
        m << std::exp(complexd(0, -(fi + fz) * total)), 0, 0,
            std::exp(complexd(0, -(fi - fz) * total));
        return m;
    }
};

inline SolvedStructure solved_structure(const RunConfig& cfg, const json& solution) {
    if (!cfg.waveguide) throw ConfigError("verify: needs the 'waveguide' section");
    auto laws = laws_of(*cfg.waveguide);
    const double w0 = solution.at("omega0").get<double>();
    std::vector<double> L = solution.at("L").get<std::vector<double>>();
    ScattererSection ss = cfg.scatterer.value_or(ScattererSection{});
    SolvedStructure s{mode_pair_coefficients(laws[0], laws[1], w0, 4),
                      scatterer_of(ss, w0), std::move(L), w0};
    return s;
}

} // namespace detail

/// verify: residual fit + residual order (+ pulse metrics when configured)
/// for a previously emitted solution record.
inline ResultBundle cmd_verify(const RunConfig& cfg, const std::string& solution_text) {
    json sol;
    try {
        sol = json::parse(solution_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("verify: cannot parse solution record: ") + e.what());
    }
    detail::SolvedStructure s = detail::solved_structure(cfg, sol);

    MatrixSweep sweep = [&](double w) { return s.period_squared_full(w); };
    ResidualFit fit = residual_fit(sweep, s.w0, 0.02 * s.w0);
    // asymptotic window, upper side: the second mode cuts off ~9.5% below w0
    ResidualOrder order = residual_order(sweep, s.w0, 1e-4, 1e-2, 12, SweepSides::above);

    ResultBundle out;
    stamp_provenance(out.record, cfg, "verify");
    out.record.put("omega0", s.w0);
    out.record.put("theta1", fit.theta1());
    out.record.put("theta2", fit.theta2());
    out.record.put("theta3", fit.theta(3));
    out.record.put("cubic_I", fit.theta(3));
    out.record.put("cubic_x", fit.gen_x(3));
    out.record.put("cubic_y", fit.gen_y(3));
    out.record.put("cubic_z", fit.gen_z(3));
    out.record.put("fit_residual", fit.fit_residual);
    out.record.put("fit_condition", fit.condition);
    out.record.put("slope", order.slope);
    out.record.put("slope_r2", order.r2);

    if (cfg.pulse) {
        PulseSpec ps;
        ps.w0 = s.w0;
        ps.rms_bandwidth = cfg.pulse->bandwidth;
        ps.samples = cfg.pulse->samples;
        PulseStructure st;
        st.period = [&](double w) { return s.period_full_2x2(w); };
        st.periods = cfg.pulse->periods;
        st.reference = [&](double w) { return s.bare_2x2(w); };
        PulseResult pr = propagate_pulse(ps, st);
        out.record.put("pulse_centroid_mode1", pr.modes[0].centroid);
        out.record.put("pulse_centroid_mode2", pr.modes[1].centroid);
        out.record.put("pulse_rms_mode1", pr.modes[0].rms_width);
        out.record.put("pulse_rms_mode2", pr.modes[1].rms_width);
        out.record.put("pulse_energy_out", pr.output_energy);
    }
    return out;
}

/// design-uniaxial: medium design point, stack lengths, white-line table.
inline ResultBundle cmd_design_uniaxial(const RunConfig& cfg) {
    if (!cfg.uniaxial) throw ConfigError("design-uniaxial: needs the 'uniaxial' section");
    const auto& u = *cfg.uniaxial;
    const DesignCondition cond = u.curvature == "wavevector"
                                     ? DesignCondition::wavevector_curvature
                                     : DesignCondition::index_curvature;
    UniaxialDesignResult d = uniaxial_design_solve(u.eps_inf, u.omega_rx, u.omega_ry, cond);
    UniaxialMedium medium = detail::medium_of(u, d.omega_p);
    auto sf = special_frequencies(u.eps_inf, u.omega_rx, u.omega_ry, d.omega_p);

    ResultBundle out;
    stamp_provenance(out.record, cfg, "design-uniaxial");
    out.record.put("curvature_condition", u.curvature);
    out.record.put("omega_p", d.omega_p);
    out.record.put("omega_0", d.omega_0);
    out.record.put("seed_omega_p", d.seed_omega_p);
    out.record.put("seed_omega_0", d.seed_omega_0);
    out.record.put("omega_s", sf.omega_s);
    out.record.put("residual_equal", d.residual_equal);
    out.record.put("residual_curvature", d.residual_curvature);
    out.record.put("n_at_omega0", medium.nx(d.omega_0));

    if (cfg.graphene) {
        const auto& g = *cfg.graphene;
        StackDesign stack = design_stack(g.flakes, g.stack_length, d.omega_0);
        out.record.put("flakes", g.flakes);
        out.record.put("chi", stack.chi);
        out.record.put("length_ratio", length_ratio(stack.chi));
        out.record.put("L_g", stack.L_g);
        out.record.put("L_m", stack.L_m);

        auto provider = default_conductivity_provider();
        GrapheneFlake base = detail::flake_of(g);
        Table white;
        white.name = "white-line";
        white.columns = {"B0_T", "mu_c_eV", "tilt_rad", "transmissivity"};
        std::vector<double> grid = g.B0_grid.empty() ? std::vector<double>{g.B0_T} : g.B0_grid;
        for (double b0 : grid) {
            const double mu =
                find_working_chemical_potential(b0, stack.chi, medium, provider, d.omega_0, base);
            GrapheneFlake f = base;
            f.B0_T = b0;
            f.mu_c_eV = mu;
            auto tr = tilt_and_transmissivity(f, medium, provider, d.omega_0);
            white.rows.push_back({b0, mu, tr.tilt_rad, tr.transmissivity});
        }
        out.tables.push_back(std::move(white));
    }
    return out;
}

/// sweep: transmissivity table of the full stack over the configured grid.
inline ResultBundle cmd_sweep(const RunConfig& cfg, int threads = 1) {
    if (!cfg.uniaxial || !cfg.graphene || !cfg.sweep)
        throw ConfigError("sweep: needs 'uniaxial', 'graphene' and 'sweep' sections");
    const auto& u = *cfg.uniaxial;
    const auto& g = *cfg.graphene;
    const DesignCondition cond = u.curvature == "wavevector"
                                     ? DesignCondition::wavevector_curvature
                                     : DesignCondition::index_curvature;
    UniaxialDesignResult d = uniaxial_design_solve(u.eps_inf, u.omega_rx, u.omega_ry, cond);
    UniaxialMedium medium = detail::medium_of(u, d.omega_p);
    StackDesign stack = design_stack(g.flakes, g.stack_length, d.omega_0);
    auto provider = default_conductivity_provider();
    GrapheneFlake flake = detail::flake_of(g);
    if (g.mu_c == "auto")
        flake.mu_c_eV = find_working_chemical_potential(g.B0_T, stack.chi, medium, provider,
                                                        d.omega_0, flake);

    std::vector<double> grid(cfg.sweep->points);
    for (int i = 0; i < cfg.sweep->points; ++i)
        grid[i] = cfg.sweep->omega_min +
                  (cfg.sweep->omega_max - cfg.sweep->omega_min) * i / (cfg.sweep->points - 1);
    auto rows = transmissivity_sweep(stack, medium, flake, provider, grid, threads);

    ResultBundle out;
    stamp_provenance(out.record, cfg, "sweep");
    out.record.put("omega_0", d.omega_0);
    out.record.put("mu_c_eV", flake.mu_c_eV);
    out.record.put("B0_T", flake.B0_T);
    out.record.put("points", cfg.sweep->points);
    Table t;
    t.name = "transmissivity";
    t.columns = {"omega_over_omega0", "P11_sq", "P12_sq", "P21_sq", "P22_sq"};
    for (const auto& r : rows) t.rows.push_back({r.w_over_w0, r.p11, r.p12, r.p21, r.p22});
    out.tables.push_back(std::move(t));
    return out;
}

/// propagate: solve the reduced design, then push a pulse through it.
inline ResultBundle cmd_propagate(const RunConfig& cfg) {
    if (!cfg.waveguide || !cfg.pulse)
        throw ConfigError("propagate: needs 'waveguide' and 'pulse' sections");
    ResultBundle solved = cmd_solve(cfg);
    json sol = json::parse(solved.record.serialize());
    detail::SolvedStructure s = detail::solved_structure(cfg, sol);

    PulseSpec ps;
    ps.w0 = s.w0;
    ps.rms_bandwidth = cfg.pulse->bandwidth;
    ps.samples = cfg.pulse->samples;
    ps.amplitudes = Eigen::Vector2cd(1.0, 1.0);
    PulseStructure st;
    st.period = [&](double w) { return s.period_full_2x2(w); };
    st.periods = cfg.pulse->periods;
    st.reference = [&](double w) { return s.bare_2x2(w); };
    PulseResult pr = propagate_pulse(ps, st);

    ResultBundle out;
    stamp_provenance(out.record, cfg, "propagate");
    out.record.put("omega0", s.w0);
    out.record.put("periods", cfg.pulse->periods);
    out.record.put("energy_in", pr.input_energy);
    out.record.put("energy_out", pr.output_energy);
    out.record.put("centroid_mode1", pr.modes[0].centroid);
    out.record.put("centroid_mode2", pr.modes[1].centroid);
    out.record.put("rms_mode1", pr.modes[0].rms_width);
    out.record.put("rms_mode2", pr.modes[1].rms_width);
    out.record.put("input_rms", pr.input_rms_width);
    if (pr.reference_modes) {
        out.record.put("ref_centroid_mode1", (*pr.reference_modes)[0].centroid);
        out.record.put("ref_centroid_mode2", (*pr.reference_modes)[1].centroid);
        out.record.put("ref_rms_mode1", (*pr.reference_modes)[0].rms_width);
        out.record.put("ref_rms_mode2", (*pr.reference_modes)[1].rms_width);
    }
    Table series;
    series.name = "pulse";
    series.columns = {"t", "mode1_re", "mode1_im", "mode2_re", "mode2_im"};
    const int stride = std::max<size_t>(1, pr.t.size() / 512);
    for (size_t i = 0; i < pr.t.size(); i += stride)
        series.rows.push_back({pr.t[i], pr.series[0][i].real(), pr.series[0][i].imag(),
                               pr.series[1][i].real(), pr.series[1][i].imag()});
    out.tables.push_back(std::move(series));
    return out;
}

} // namespace dispeq
