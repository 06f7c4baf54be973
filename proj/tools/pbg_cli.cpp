// pbg: simulation front door for collective emission near a photonic band edge.
//
// Subcommands: kernel, osc, spectrum, meanfield, transparent, ensemble,
// noise, stochastic, oracle-compare.  All physical quantities are in
// dimensionless collective units.  Exit codes: 0 ok, 2 config error,
// 3 numeric error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbg/bath.hpp"
#include "pbg/io.hpp"
#include "pbg/lowexc.hpp"
#include "pbg/meanfield.hpp"
#include "pbg/noise.hpp"
#include "pbg/parallel.hpp"
#include "pbg/quantum.hpp"

using nlohmann::json;
using namespace pbg;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    IniConfig cfg;
    std::string command;
    std::string out_dir = ".";
    std::string prefix;
    std::uint64_t seed = 0;
    int workers = 1;
    bool convergence_check = false;
    std::vector<std::string> outputs; // files written (for the manifest)
    json summary;

    std::string path(const std::string& suffix) const {
        return (std::filesystem::path(out_dir) / (prefix + suffix)).string();
    }
    void note_output(const std::string& p) { outputs.push_back(p); }
};

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

BandEdgeModel parse_model(const IniConfig& cfg) {
    std::string type = cfg.get_or("model", "type", "isotropic");
    if (type == "free") {
        cfg.enforce_keys("model", {"type", "gamma"});
        FreeSpace m;
        m.gamma = cfg.get_double_or("model", "gamma", 1.0);
        validate(BandEdgeModel{m});
        return m;
    }
    if (type == "isotropic") {
        cfg.enforce_keys("model", {"type", "beta1"});
        IsotropicEffMass m;
        m.beta1 = cfg.get_double_or("model", "beta1", 1.0);
        validate(BandEdgeModel{m});
        return m;
    }
    if (type == "anisotropic") {
        cfg.enforce_keys("model", {"type", "beta3", "omega_c", "edge_shift"});
        AnisotropicEffMass m;
        m.beta3 = cfg.get_double_or("model", "beta3", m.beta3);
        m.omega_c = cfg.get_double_or("model", "omega_c", m.omega_c);
        m.edge_shift = cfg.get_double_or("model", "edge_shift", m.edge_shift);
        validate(BandEdgeModel{m});
        return m;
    }
    if (type == "full") {
        cfg.enforce_keys("model", {"type", "k0", "gamma_k", "cutoff_mult"});
        IsotropicFull m;
        m.k0 = cfg.get_double_or("model", "k0", m.k0);
        m.gamma_k = cfg.get_double_or("model", "gamma_k", m.gamma_k);
        m.cutoff_mult = cfg.get_double_or("model", "cutoff_mult", m.cutoff_mult);
        validate(BandEdgeModel{m});
        return m;
    }
    throw ConfigError("unknown model type '" + type + "' (free|isotropic|anisotropic|full)");
}

TimeGrid parse_grid(const IniConfig& cfg, double dflt_tau_max = 25.0, double dflt_dtau = 0.01) {
    cfg.enforce_keys("grid", {"tau_max", "dtau"});
    TimeGrid g{cfg.get_double_or("grid", "tau_max", dflt_tau_max),
               cfg.get_double_or("grid", "dtau", dflt_dtau)};
    if (!(g.dtau > 0.0) || !(g.tau_max > 0.0))
        throw ConfigError("grid: tau_max and dtau must be positive");
    return g;
}

std::vector<double> delta_c_list(const RunContext& ctx) {
    if (!ctx.cfg.has("params", "delta_c")) return {0.0};
    return ctx.cfg.get_double_list("params", "delta_c");
}

std::string dc_tag(double dc) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "_dc%g", dc);
    return buf;
}

// ---------------------------------------------------------------- kernel

void cmd_kernel(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"delta_c", "dtau_min", "dtau_max", "n_points"});
    BandEdgeModel model = parse_model(ctx.cfg);
    double lo = ctx.cfg.get_double_or("params", "dtau_min", 1e-3);
    double hi = ctx.cfg.get_double_or("params", "dtau_max", 1e2);
    int np = (int)ctx.cfg.get_int_or("params", "n_points", 400);
    if (!(lo > 0.0) || !(hi > lo) || np < 2) throw ConfigError("kernel: need 0 < dtau_min < dtau_max, n_points >= 2");
    for (double dc : delta_c_list(ctx)) {
        CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
        csv.comment("memory kernel G(dtau), dimensionless collective units");
        csv.comment("delta_c = " + fmt_num(dc) + " (atomic detuning from the band edge)");
        csv.columns({"dtau", "re_G", "im_G", "abs_G"});
        for (int i = 0; i < np; ++i) {
            double t = lo * std::pow(hi / lo, (double)i / (np - 1));
            cplx g = memory_kernel(model, Detuning{dc}, t);
            csv.row({t, g.real(), g.imag(), std::abs(g)});
        }
        ctx.note_output(csv.path());
    }
    ctx.summary["convergence_check"] = ctx.convergence_check
                                           ? "not applicable (closed-form evaluation)"
                                           : "not requested";
}

// ------------------------------------------------------------------- osc

void cmd_osc(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"delta_c", "q0"});
    BandEdgeModel model = parse_model(ctx.cfg);
    TimeGrid grid = parse_grid(ctx.cfg);
    std::vector<double> q0s = ctx.cfg.has("params", "q0")
                                  ? ctx.cfg.get_double_list("params", "q0")
                                  : std::vector<double>{0.0};
    json percurve = json::array();
    for (double dc : delta_c_list(ctx)) {
        CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
        csv.comment("low-excitation amplitude B(tau) and excited population |B|^2");
        csv.comment("delta_c = " + fmt_num(dc) + "; Mandel Q columns for Q(0) values listed");
        std::vector<std::string> cols{"tau", "re_B", "im_B", "population"};
        for (double q0 : q0s) cols.push_back("mandel_q_q0_" + fmt_num(q0));
        csv.columns(cols);
        const bool fs = std::holds_alternative<FreeSpace>(model);
        OscillatorSolution sol;
        if (!fs) sol = solve_roots(Detuning{dc});
        double steady_pop = 0.0;
        for (int k = 0; k <= grid.steps(); ++k) {
            double tau = grid.tau(k);
            cplx B = fs ? amplitude_B(model, Detuning{dc}, tau) : amplitude_B(sol, tau);
            double pop = std::norm(B);
            std::vector<double> row{tau, B.real(), B.imag(), pop};
            for (double q0 : q0s) row.push_back(pop * (q0 - 1.0) + 1.0);
            csv.row(row);
            steady_pop = pop;
        }
        ctx.note_output(csv.path());
        json c;
        c["delta_c"] = dc;
        c["population_at_tau_max"] = steady_pop;
        if (!fs) {
            double ts = steady_state_time(sol, grid.tau_max, grid.dtau);
            c["steady_state_time"] = ts; // negative: not steady within grid
        }
        percurve.push_back(c);
    }
    ctx.summary["curves"] = percurve;
    ctx.summary["convergence_check"] = ctx.convergence_check
                                           ? "not applicable (closed-form evaluation)"
                                           : "not requested";
}

// -------------------------------------------------------------- spectrum

void cmd_spectrum(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"delta_c", "omega_min", "omega_max", "n_points"});
    double lo = ctx.cfg.get_double_or("params", "omega_min", 0.0);
    double hi = ctx.cfg.get_double_or("params", "omega_max", 10.0);
    int np = (int)ctx.cfg.get_int_or("params", "n_points", 1000);
    if (!(hi > lo) || np < 2) throw ConfigError("spectrum: need omega_min < omega_max, n_points >= 2");
    for (double dc : delta_c_list(ctx)) {
        std::vector<double> wgrid(np);
        for (int i = 0; i < np; ++i) wgrid[i] = lo + (hi - lo) * i / (np - 1);
        SpectrumCurve s = emission_spectrum(Detuning{dc}, wgrid);
        CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
        csv.comment("steady-state emission spectrum; omega measured from the band edge");
        csv.comment("delta_c = " + fmt_num(dc) + "; density zero at and below the edge");
        csv.columns({"omega_minus_omega_c", "density"});
        for (int i = 0; i < np; ++i) csv.row({s.omega_grid[i], s.density[i]});
        ctx.note_output(csv.path());
    }
    ctx.summary["convergence_check"] = "not applicable (closed-form evaluation)";
}

// ------------------------------------------------------------- meanfield

json meanfield_curve_summary(const TimeSeries& ts) {
    json j;
    j["steady_j3"] = ts.states.back().j3;
    j["steady_abs_j12"] = std::abs(ts.states.back().j12);
    j["trailing_variation"] = trailing_variation(ts);
    try {
        j["steady_phase_rate"] = steady_phase_rate(ts);
    } catch (const std::exception&) {
        j["steady_phase_rate"] = nullptr;
    }
    return j;
}

void write_meanfield_csv(RunContext& ctx, const std::string& tag, const TimeSeries& ts,
                         const std::string& desc) {
    CsvWriter csv(ctx.path(tag + ".csv"));
    csv.comment(desc);
    csv.comment("per-atom inversion j3 and polarization j12; collective units");
    csv.columns({"tau", "j3", "re_j12", "im_j12", "abs_j12", "phase"});
    auto ph = phase_angle(ts);
    for (int k = 0; k < ts.size(); ++k)
        csv.row({ts.grid.tau(k), ts.states[k].j3, ts.states[k].j12.real(),
                 ts.states[k].j12.imag(), std::abs(ts.states[k].j12), ph[k]});
    ctx.note_output(csv.path());
}

void cmd_meanfield(RunContext& ctx) {
    ctx.cfg.enforce_keys("params",
                         {"delta_c", "r", "phase0", "sigma", "deph_runs"});
    BandEdgeModel model = parse_model(ctx.cfg);
    TimeGrid grid = parse_grid(ctx.cfg);
    InitialStateSpec init{ctx.cfg.get_double_or("params", "r", 1e-5),
                          ctx.cfg.get_double_or("params", "phase0", 0.0)};
    double sigma = ctx.cfg.get_double_or("params", "sigma", 0.0);
    int deph_runs = (int)ctx.cfg.get_int_or("params", "deph_runs", 1);
    json percurve = json::array();
    for (double dc : delta_c_list(ctx)) {
        TimeSeries ts;
        if (sigma > 0.0 && deph_runs > 1) {
            ts = dephased_ensemble_mean(model, Detuning{dc}, init, grid,
                                        DephasingSpec{sigma, ctx.seed}, deph_runs);
        } else if (sigma > 0.0) {
            ts = evolve_meanfield(model, Detuning{dc}, init, grid, DephasingSpec{sigma, ctx.seed});
        } else {
            ts = evolve_meanfield(model, Detuning{dc}, init, grid);
        }
        write_meanfield_csv(ctx, dc_tag(dc), ts,
                            "mean-field evolution, delta_c = " + fmt_num(dc) +
                                (sigma > 0.0 ? ", dephasing sigma = " + fmt_num(sigma) +
                                                   " (redrawn each dtau = " + fmt_num(grid.dtau) + ")"
                                             : ""));
        json c = meanfield_curve_summary(ts);
        c["delta_c"] = dc;
        if (ctx.convergence_check && sigma == 0.0) {
            TimeGrid g2{grid.tau_max, grid.dtau / 2.0};
            TimeSeries ts2 = evolve_meanfield(model, Detuning{dc}, init, g2);
            double dmax = 0.0;
            for (int k = 0; k < ts.size(); ++k)
                dmax = std::max(dmax, std::abs(ts.states[k].j3 - ts2.states[2 * k].j3));
            c["dtau_halving_max_j3_dev"] = dmax;
        }
        percurve.push_back(c);
    }
    ctx.summary["curves"] = percurve;
}

// ----------------------------------------------------------- transparent

void cmd_transparent(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"r", "delta_c_min", "delta_c_max", "tol"});
    BandEdgeModel model = parse_model(ctx.cfg);
    if (!std::holds_alternative<IsotropicEffMass>(model))
        throw ConfigError("transparent: isotropic model required");
    TimeGrid grid = parse_grid(ctx.cfg, 25.0, 0.01);
    InitialStateSpec init{ctx.cfg.get_double_or("params", "r", 1e-5), 0.0};
    double lo = ctx.cfg.get_double_or("params", "delta_c_min", -1.0);
    double hi = ctx.cfg.get_double_or("params", "delta_c_max", -0.3);
    double tol = ctx.cfg.get_double_or("params", "tol", 1e-3);
    Detuning star = find_transparent_detuning(model, init, lo, hi, grid, tol);
    TimeSeries ts = evolve_meanfield(model, star, init, grid);
    ctx.summary["delta_c_star"] = star.value;
    ctx.summary["steady_j3_at_star"] = ts.states.back().j3;
    ctx.summary["steady_abs_j12_at_star"] = std::abs(ts.states.back().j12);
    ctx.summary["measurement_horizon_tau"] = grid.tau_max;
    write_meanfield_csv(ctx, "_at_star", ts,
                        "mean-field evolution at the transparent detuning delta_c* = " +
                            fmt_num(star.value));
    if (ctx.convergence_check) {
        TimeGrid g2{grid.tau_max, grid.dtau / 2.0};
        Detuning star2 = find_transparent_detuning(model, init, lo, hi, g2, tol);
        ctx.summary["dtau_halving_delta_c_star"] = star2.value;
    }
}

// -------------------------------------------------------------- ensemble

void cmd_ensemble(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"delta_c", "n_atoms", "n_realizations", "t0_policy",
                                    "snapshot_taus", "delay_bins", "delay_max", "r"});
    EnsembleSpec spec;
    spec.model = parse_model(ctx.cfg);
    spec.grid = parse_grid(ctx.cfg);
    spec.n_atoms = (int)ctx.cfg.get_int_or("params", "n_atoms", 100);
    spec.n_realizations = (int)ctx.cfg.get_int_or("params", "n_realizations", 2000);
    spec.master_seed = ctx.seed;
    std::string pol = ctx.cfg.get_or("params", "t0_policy", "at_crossover");
    if (pol == "at_zero") spec.t0_policy = T0Policy::at_zero;
    else if (pol == "at_crossover") spec.t0_policy = T0Policy::at_crossover;
    else throw ConfigError("ensemble: t0_policy must be at_zero or at_crossover");
    if (ctx.cfg.has("params", "snapshot_taus"))
        spec.snapshot_taus = ctx.cfg.get_double_list("params", "snapshot_taus");
    spec.delay_bins = (int)ctx.cfg.get_int_or("params", "delay_bins", 50);
    spec.delay_max = ctx.cfg.get_double_or("params", "delay_max", 0.0);

    json percurve = json::array();
    for (double dc : delta_c_list(ctx)) {
        spec.delta_c = Detuning{dc};
        EnsembleStats st = run_ensemble(spec, ctx.workers);
        {
            CsvWriter csv(ctx.path(dc_tag(dc) + "_mean.csv"));
            csv.comment("ensemble means over " + std::to_string(spec.n_realizations) +
                        " realizations, N = " + std::to_string(spec.n_atoms) +
                        ", delta_c = " + fmt_num(dc));
            csv.comment("t0 policy: " + pol + "; crossover tau0 = " + fmt_num(st.tau0));
            csv.columns({"tau", "mean_j3", "abs_mean_j12", "re_mean_j12", "im_mean_j12"});
            for (int k = 0; k <= spec.grid.steps(); ++k)
                csv.row({spec.grid.tau(k), st.mean_inversion[k], st.mean_polarization_modulus[k],
                         st.mean_polarization[k].real(), st.mean_polarization[k].imag()});
            ctx.note_output(csv.path());
        }
        {
            CsvWriter csv(ctx.path(dc_tag(dc) + "_delay.csv"));
            csv.comment("delay-time histogram (first tau with j3 <= 0)");
            csv.comment("overflow (never crossed) = " + std::to_string(st.delay_histogram.overflow));
            csv.columns({"bin_lo", "bin_hi", "count"});
            const Histogram& hg = st.delay_histogram;
            double bw = (hg.hi - hg.lo) / hg.counts.size();
            for (std::size_t b = 0; b < hg.counts.size(); ++b)
                csv.row({hg.lo + b * bw, hg.lo + (b + 1) * bw, (double)hg.counts[b]});
            ctx.note_output(csv.path());
        }
        if (!st.polarization_snapshots.empty()) {
            CsvWriter csv(ctx.path(dc_tag(dc) + "_snapshots.csv"));
            csv.comment("polarization scatter snapshots (kappa = N*|j12|, phi = arg j12)");
            csv.columns({"tau", "kappa", "phi"});
            for (const auto& [tau, samples] : st.polarization_snapshots)
                for (const auto& s : samples) csv.row({tau, s.kappa, s.phi});
            ctx.note_output(csv.path());
        }
        json c;
        c["delta_c"] = dc;
        c["tau0"] = st.tau0;
        c["steady_mean_j3"] = st.mean_inversion.back();
        c["steady_abs_mean_j12"] = st.mean_polarization_modulus.back();
        c["delay_overflow"] = st.delay_histogram.overflow;
        percurve.push_back(c);
    }
    ctx.summary["curves"] = percurve;
    if (ctx.convergence_check)
        ctx.summary["convergence_check"] =
            "rerun with half dtau and a fresh config to validate; skipped inline (cost)";
}

// ----------------------------------------------------------------- noise

void cmd_noise(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"alpha", "n_terms", "omega_max", "omega_c", "n_paths",
                                    "lag_min", "lag_max", "n_lags"});
    NoiseSpec spec;
    spec.alpha = (int)ctx.cfg.get_int_or("params", "alpha", 1);
    spec.n_terms = (int)ctx.cfg.get_int_or("params", "n_terms", 1000);
    spec.omega_max = ctx.cfg.get_double_or("params", "omega_max", 2.0 * pi * 100.0);
    spec.omega_c = ctx.cfg.get_double_or("params", "omega_c", 0.01);
    int n_paths = (int)ctx.cfg.get_int_or("params", "n_paths", 2000);
    if (n_paths < 2) throw ConfigError("noise: n_paths >= 2 required");
    TimeGrid grid = parse_grid(ctx.cfg, 10.0, 0.01);
    double lag_lo = ctx.cfg.get_double_or("params", "lag_min", 0.1);
    double lag_hi = ctx.cfg.get_double_or("params", "lag_max", 5.0);
    int n_lags = (int)ctx.cfg.get_int_or("params", "n_lags", 50);
    if (!(lag_lo > 0.0) || !(lag_hi > lag_lo) || n_lags < 2)
        throw ConfigError("noise: need 0 < lag_min < lag_max, n_lags >= 2");

    std::vector<NoisePath> paths(n_paths);
    parallel_chunks(n_paths, ctx.workers, [&](int, int b, int e) {
        for (int p = b; p < e; ++p) {
            NoiseSpec s = spec;
            s.seed = substream(ctx.seed, (std::uint64_t)p).next_u64();
            paths[p] = generate_noise(s, grid);
        }
    });
    std::vector<double> lags(n_lags);
    for (int i = 0; i < n_lags; ++i) lags[i] = lag_lo + (lag_hi - lag_lo) * i / (n_lags - 1);
    auto ac = autocorrelation(paths, lags);
    double max_rel = 0.0;
    {
        CsvWriter csv(ctx.path("_autocorr.csv"));
        csv.comment("ensemble autocorrelation of the classical colored noise");
        csv.comment("target: lag^(-alpha/2); analytic_marginal: closed form of the cosine sum");
        csv.columns({"lag", "measured", "analytic_marginal", "target"});
        for (int i = 0; i < n_lags; ++i) {
            double target = std::pow(lags[i], -0.5 * spec.alpha);
            max_rel = std::max(max_rel, std::abs(ac[i] - target) / target);
            csv.row({lags[i], ac[i], analytic_autocorrelation(spec, lags[i]), target});
        }
        ctx.note_output(csv.path());
    }
    {
        CsvWriter csv(ctx.path("_sample_path.csv"));
        csv.comment("first noise path (seed-deterministic)");
        csv.columns({"tau", "xi"});
        for (int k = 0; k <= grid.steps(); ++k) csv.row({grid.tau(k), paths[0].xi[k]});
        ctx.note_output(csv.path());
    }
    ctx.summary["max_relative_autocorr_error"] = max_rel;
    ctx.summary["n_paths"] = n_paths;
    ctx.summary["convergence_check"] = "not applicable (spectral construction)";
}

// ------------------------------------------------------------ stochastic

void cmd_stochastic(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"delta_c", "n_atoms", "n_paths", "alpha", "n_terms",
                                    "omega_max", "omega_c"});
    BandEdgeModel model = parse_model(ctx.cfg);
    TimeGrid grid = parse_grid(ctx.cfg, 12.5, 0.005);
    NoiseSpec nspec;
    nspec.alpha = (int)ctx.cfg.get_int_or("params", "alpha", 1);
    nspec.n_terms = (int)ctx.cfg.get_int_or("params", "n_terms", 1000);
    nspec.omega_max = ctx.cfg.get_double_or("params", "omega_max", 2.0 * pi * 112.0);
    nspec.omega_c = ctx.cfg.get_double_or("params", "omega_c", 0.01);
    int n_atoms = (int)ctx.cfg.get_int_or("params", "n_atoms", 1000);
    int n_paths = (int)ctx.cfg.get_int_or("params", "n_paths", 2000);
    if (n_paths < 1) throw ConfigError("stochastic: n_paths >= 1 required");

    json percurve = json::array();
    for (double dc : delta_c_list(ctx)) {
        VolterraWeights shared;
        if (!std::holds_alternative<FreeSpace>(model))
            shared = make_weights(model, grid.steps(), grid.dtau);
        const int n = grid.steps();
        const int n_chunks = chunk_count(n_paths);
        std::vector<std::vector<double>> sj3(n_chunks), saj(n_chunks);
        parallel_chunks(n_paths, ctx.workers, [&](int cI, int b, int e) {
            sj3[cI].assign(n + 1, 0.0);
            saj[cI].assign(n + 1, 0.0);
            for (int p = b; p < e; ++p) {
                NoiseSpec s = nspec;
                s.seed = substream(ctx.seed, (std::uint64_t)p).next_u64();
                TimeSeries ts = evolve_stochastic(model, Detuning{dc}, n_atoms, grid, s,
                                                  {1.0, 0.0}, &shared);
                for (int k = 0; k <= n; ++k) {
                    sj3[cI][k] += ts.states[k].j3;
                    saj[cI][k] += std::abs(ts.states[k].j12);
                }
            }
        });
        std::vector<double> mj3(n + 1, 0.0), maj(n + 1, 0.0);
        for (int cI = 0; cI < n_chunks; ++cI)
            for (int k = 0; k <= n; ++k) {
                mj3[k] += sj3[cI][k];
                maj[k] += saj[cI][k];
            }
        for (int k = 0; k <= n; ++k) {
            mj3[k] /= n_paths;
            maj[k] /= n_paths;
        }
        CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
        csv.comment("stochastic (classical-noise) superradiance, ensemble means over " +
                    std::to_string(n_paths) + " paths, N = " + std::to_string(n_atoms));
        csv.comment("noise: alpha=" + std::to_string(nspec.alpha) +
                    " n_terms=" + std::to_string(nspec.n_terms) +
                    " omega_max=" + fmt_num(nspec.omega_max));
        csv.columns({"tau", "mean_j3", "mean_abs_j12"});
        for (int k = 0; k <= n; ++k) csv.row({grid.tau(k), mj3[k], maj[k]});
        ctx.note_output(csv.path());
        // crossing time of the mean inversion, linearly interpolated
        double crossing = -1.0;
        for (int k = 1; k <= n; ++k)
            if (mj3[k - 1] > 0.0 && mj3[k] <= 0.0) {
                crossing = grid.tau(k - 1) +
                           grid.dtau * mj3[k - 1] / (mj3[k - 1] - mj3[k]);
                break;
            }
        json c;
        c["delta_c"] = dc;
        c["mean_j3_crossing_tau"] = crossing;
        c["steady_mean_j3"] = mj3[n];
        percurve.push_back(c);
    }
    ctx.summary["curves"] = percurve;
    if (ctx.convergence_check)
        ctx.summary["convergence_check"] =
            "rerun with half dtau and a fresh config to validate; skipped inline (cost)";
}

// -------------------------------------------------------- oracle-compare

void cmd_oracle_compare(RunContext& ctx) {
    ctx.cfg.enforce_keys("params", {"case", "delta_c", "n_modes", "omega_window", "r"});
    BandEdgeModel model = parse_model(ctx.cfg);
    std::string which = ctx.cfg.get_or("params", "case", "lowexc");
    int n_modes = (int)ctx.cfg.get_int_or("params", "n_modes", 2000);
    double window = ctx.cfg.get_double_or("params", "omega_window", 1e5);
    json percurve = json::array();
    for (double dc : delta_c_list(ctx)) {
        DiscreteBath bath = build_bath(model, Detuning{dc}, n_modes, window);
        json c;
        c["delta_c"] = dc;
        c["n_modes"] = bath.n_modes();
        c["recurrence_time"] = bath.recurrence_time;
        double maxdev = 0.0;
        if (which == "lowexc" || which == "gain") {
            TimeGrid grid = parse_grid(ctx.cfg, which == "gain" ? 1.0 : 20.0, 0.005);
            OracleMode mode = which == "gain" ? OracleMode::lowexc_gain : OracleMode::lowexc_decay;
            OracleRun run = oracle_evolve(bath, mode, grid);
            CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
            csv.comment("discrete-bath oracle vs analytic low-excitation amplitude, case " + which);
            csv.columns({"tau", "oracle_pop", "analytic_pop", "abs_dev", "bath_occupation"});
            for (int k = 0; k <= grid.steps(); ++k) {
                double tau = grid.tau(k);
                double ana = which == "gain"
                                 ? std::norm(amplitude_D(model, Detuning{dc}, tau))
                                 : std::norm(amplitude_B(model, Detuning{dc}, tau));
                double dev = std::abs(run.series.states[k].j3 - ana);
                maxdev = std::max(maxdev, dev);
                csv.row({tau, run.series.states[k].j3, ana, dev, run.bath_occupation[k]});
            }
            ctx.note_output(csv.path());
            if (ctx.convergence_check) {
                TimeGrid g2{grid.tau_max, grid.dtau / 2.0};
                OracleRun r2 = oracle_evolve(bath, mode, g2);
                double dmax = 0.0;
                for (int k = 0; k <= grid.steps(); ++k)
                    dmax = std::max(dmax, std::abs(run.series.states[k].j3 -
                                                   r2.series.states[2 * k].j3));
                c["dtau_halving_max_dev"] = dmax;
            }
        } else if (which == "meanfield") {
            TimeGrid grid = parse_grid(ctx.cfg, 25.0, 0.005);
            InitialStateSpec init{ctx.cfg.get_double_or("params", "r", 1e-5), 0.0};
            OracleRun run = oracle_evolve(bath, OracleMode::meanfield, grid, init.state());
            TimeSeries mf = evolve_meanfield(model, Detuning{dc}, init, grid);
            CsvWriter csv(ctx.path(dc_tag(dc) + ".csv"));
            csv.comment("discrete-bath oracle vs Volterra mean field, j3(tau)");
            csv.columns({"tau", "oracle_j3", "meanfield_j3", "abs_dev"});
            for (int k = 0; k <= grid.steps(); ++k) {
                double dev = std::abs(run.series.states[k].j3 - mf.states[k].j3);
                maxdev = std::max(maxdev, dev);
                csv.row({grid.tau(k), run.series.states[k].j3, mf.states[k].j3, dev});
            }
            ctx.note_output(csv.path());
            if (ctx.convergence_check) {
                TimeGrid g2{grid.tau_max, grid.dtau / 2.0};
                OracleRun r2 = oracle_evolve(bath, OracleMode::meanfield, g2, init.state());
                double dmax = 0.0;
                for (int k = 0; k <= grid.steps(); ++k)
                    dmax = std::max(dmax, std::abs(run.series.states[k].j3 -
                                                   r2.series.states[2 * k].j3));
                c["dtau_halving_max_dev"] = dmax;
            }
        } else {
            throw ConfigError("oracle-compare: case must be lowexc, gain or meanfield");
        }
        c["max_abs_deviation"] = maxdev;
        percurve.push_back(c);
    }
    ctx.summary["case"] = which;
    ctx.summary["curves"] = percurve;
}

// ------------------------------------------------------------------ main

int run_cli(int argc, char** argv) {
    CLI::App app{"collective spontaneous emission near a photonic band edge (dimensionless units)"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 1;
    bool convergence = false;
    app.add_option("--config", config_path, "INI config file");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--workers", workers, "worker threads (must not affect results)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--convergence-check", convergence, "run dtau-halving validation where applicable");

    const std::vector<std::string> commands = {"kernel", "osc", "spectrum",
                                               "meanfield", "transparent", "ensemble",
                                               "noise", "stochastic", "oracle-compare"};
    for (const auto& c : commands) app.add_subcommand(c)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;

    RunContext ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.workers = workers;
    ctx.convergence_check = convergence;
    ctx.out_dir = out_dir;

    auto t_start = std::chrono::steady_clock::now();
    try {
        if (!config_path.empty()) ctx.cfg = IniConfig::parse_file(config_path);
        ctx.cfg.enforce_sections({"run", "model", "params", "grid", "output"});
        ctx.cfg.enforce_keys("run", {"command", "seed", "workers"});
        ctx.cfg.enforce_keys("output", {"prefix"});
        if (ctx.cfg.has("run", "command") && ctx.cfg.get("run", "command") != ctx.command)
            throw ConfigError("config [run] command = " + ctx.cfg.get("run", "command") +
                              " does not match CLI subcommand " + ctx.command);
        ctx.seed = seed_given ? seed : (std::uint64_t)ctx.cfg.get_int_or("run", "seed", 0);
        if (!seed_given && workers == 1)
            ctx.workers = (int)ctx.cfg.get_int_or("run", "workers", 1);
        ctx.prefix = ctx.cfg.get_or("output", "prefix", ctx.command);
        std::filesystem::create_directories(ctx.out_dir);

        if (ctx.command == "kernel") cmd_kernel(ctx);
        else if (ctx.command == "osc") cmd_osc(ctx);
        else if (ctx.command == "spectrum") cmd_spectrum(ctx);
        else if (ctx.command == "meanfield") cmd_meanfield(ctx);
        else if (ctx.command == "transparent") cmd_transparent(ctx);
        else if (ctx.command == "ensemble") cmd_ensemble(ctx);
        else if (ctx.command == "noise") cmd_noise(ctx);
        else if (ctx.command == "stochastic") cmd_stochastic(ctx);
        else if (ctx.command == "oracle-compare") cmd_oracle_compare(ctx);
        else throw ConfigError("unknown command " + ctx.command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    auto t_end = std::chrono::steady_clock::now();

    try {
        // summary (deterministic) and manifest (includes wall clock)
        std::string sum_path = ctx.path("_summary.json");
        {
            std::ofstream out(sum_path);
            json s = ctx.summary;
            s["command"] = ctx.command;
            s["seed"] = ctx.seed;
            out << s.dump(2) << "\n";
        }
        json manifest;
        manifest["version"] = kVersion;
        manifest["command"] = ctx.command;
        manifest["config"] = config_to_json(ctx.cfg);
        manifest["seed_expansion"] = {
            {"master_seed", ctx.seed},
            {"scheme", "splitmix64 counter substream per realization/path index"}};
        manifest["workers"] = ctx.workers;
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(t_end - t_start).count();
        json checks = json::object();
        for (const auto& p : ctx.outputs)
            checks[std::filesystem::path(p).filename().string()] =
                fnv1a_file(p);
        checks[std::filesystem::path(sum_path).filename().string()] = fnv1a_file(sum_path);
        manifest["output_checksums_fnv1a"] = checks;
        std::ofstream mout(ctx.path("_manifest.json"));
        mout << manifest.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
