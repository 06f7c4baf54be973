#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "meanfield.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "resolvent.hpp"
#include "rng.hpp"
#include "timeseries.hpp"

namespace pbg {

// Quantum-fluctuation-triggered superradiance.  In the fully inverted
// linearized regime the polarization operator dynamics lose their operator
// character and close on the scalar growth amplitude D(tau), the inverse
// Laplace transform of [s - Gtilde(s)]^{-1} (gain sign).

inline cplx amplitude_D(const BandEdgeModel& model, Detuning delta_c, double tau) {
    if (tau < 0.0) throw std::domain_error("amplitude_D: tau must be >= 0");
    if (auto* fs = std::get_if<FreeSpace>(&model))
        return std::exp(0.5 * fs->gamma * tau);
    if (std::holds_alternative<IsotropicEffMass>(model))
        return resolvent_amplitude(solve_resolvent_roots(delta_c.value, -1), tau);
    throw std::domain_error(
        "amplitude_D: closed form available for FreeSpace and IsotropicEffMass only; "
        "use the discrete-mode oracle (gain mode) for other models");
}

// Crossover from quantum-fluctuation growth to semiclassical evolution:
// smallest tau0 with |D(tau0)|^2 = e.  The threshold e is the unique
// constant for which the FreeSpace result is exactly 1 in collective units.
inline double crossover_time(const BandEdgeModel& model, Detuning delta_c,
                             double tau_budget = 50.0) {
    if (auto* fs = std::get_if<FreeSpace>(&model)) return 1.0 / fs->gamma;
    auto excess = [&](double t) { return std::norm(amplitude_D(model, delta_c, t)) - std::exp(1.0); };
    double lo = 0.0, hi = 0.0;
    double step = 0.25;
    for (double t = step; t <= tau_budget + 1e-12; t += step) {
        if (excess(t) >= 0.0) { hi = t; lo = t - step; break; }
    }
    if (hi == 0.0)
        throw std::runtime_error("crossover_time: |D|^2 never reaches e within the tau budget");
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (excess(mid) >= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

struct PolarizationSample {
    double kappa = 0.0; // polarization amplitude, absolute units of J12
    double phi = 0.0;   // in [0, 2 pi)
};

// kappa is Rayleigh-distributed, P(kappa) d kappa ~ kappa exp(-kappa^2/a),
// a = N |D(t0)|^2, so <kappa^{2p}> = p! a^p; phi is uniform.
inline PolarizationSample sample_initial_polarization(int n_atoms, double d_t0_sq,
                                                      SplitMix64& rng) {
    if (n_atoms < 2) throw std::domain_error("sample_initial_polarization: n_atoms >= 2");
    if (!(d_t0_sq > 0.0)) throw std::domain_error("sample_initial_polarization: d_t0_sq > 0");
    double a = (double)n_atoms * d_t0_sq;
    double u = rng.next_double();
    while (u <= 0.0) u = rng.next_double();
    return {std::sqrt(-a * std::log(u)), rng.next_angle()};
}

enum class T0Policy { at_zero, at_crossover };

struct EnsembleSpec {
    int n_atoms = 100;
    int n_realizations = 2000;
    T0Policy t0_policy = T0Policy::at_crossover;
    std::uint64_t master_seed = 0;
    BandEdgeModel model = IsotropicEffMass{};
    Detuning delta_c{0.0};
    TimeGrid grid{25.0, 0.01};
    std::vector<double> snapshot_taus;   // polarization scatter snapshot times
    int delay_bins = 50;
    double delay_max = 0.0;              // 0 => grid.tau_max
};

struct EnsembleStats {
    TimeGrid grid;
    std::vector<double> mean_inversion;             // <j3>_ens per time point
    std::vector<cplx> mean_polarization;            // <j12>_ens per time point
    std::vector<double> mean_polarization_modulus;  // |<j12>_ens|
    Histogram delay_histogram;                      // first j3=0 crossing; overflow = never
    std::vector<std::pair<double, std::vector<PolarizationSample>>> polarization_snapshots;
    double tau0 = 0.0;                              // crossover time used at handoff
};

// Ensemble of semiclassical trajectories triggered by quantum initial
// conditions.  Each realization draws (kappa, phi) at the crossover time,
// hands off j12 = kappa e^{i phi} / N with j3 = sqrt(1 - 4 |j12|^2), and
// evolves through the mean-field solver.  at_zero applies the same draw at
// tau = 0 instead (same random stream, so the two policies are directly
// comparable path by path).
inline EnsembleStats run_ensemble(const EnsembleSpec& spec, int n_workers = 1) {
    validate(spec.model);
    if (spec.n_atoms < 2) throw std::domain_error("run_ensemble: n_atoms >= 2 required");
    if (spec.n_realizations < 1) throw std::domain_error("run_ensemble: n_realizations >= 1");
    const int n = spec.grid.steps();
    const double h = spec.grid.dtau;

    const double tau0 = crossover_time(spec.model, spec.delta_c);
    // at_crossover seeds with the fluctuation level grown to tau0; at_zero
    // applies the bare tau=0 level |D(0)|^2 = 1 and lets the semiclassical
    // equations do the growing (for FreeSpace the two coincide exactly)
    const double d_t0_sq = spec.t0_policy == T0Policy::at_crossover
                               ? std::norm(amplitude_D(spec.model, spec.delta_c, tau0))
                               : 1.0;
    const int k0 = spec.t0_policy == T0Policy::at_crossover
                       ? std::min(n, (int)std::llround(tau0 / h))
                       : 0;
    const TimeGrid subgrid{(n - k0) * h, h};
    const bool free_space = std::holds_alternative<FreeSpace>(spec.model);

    VolterraWeights shared;
    if (!free_space && n - k0 > 0) shared = make_weights(spec.model, n - k0, h);

    // fixed-chunk accumulators -> worker-count-independent reductions
    const int n_chunks = chunk_count(spec.n_realizations);
    std::vector<std::vector<double>> sum_j3(n_chunks);
    std::vector<std::vector<cplx>> sum_j12(n_chunks);
    std::vector<double> delay(spec.n_realizations, -1.0);
    std::vector<int> snap_idx;
    for (double ts : spec.snapshot_taus) {
        int k = (int)std::llround(ts / h);
        if (k < 0 || k > n) throw std::domain_error("run_ensemble: snapshot tau outside grid");
        snap_idx.push_back(k);
    }
    std::vector<std::vector<PolarizationSample>> snaps(
        snap_idx.size(), std::vector<PolarizationSample>(spec.n_realizations));

    parallel_chunks(spec.n_realizations, n_workers, [&](int c, int b, int e) {
        sum_j3[c].assign(n + 1, 0.0);
        sum_j12[c].assign(n + 1, cplx(0.0));
        for (int r = b; r < e; ++r) {
            SplitMix64 rng = substream(spec.master_seed, (std::uint64_t)r);
            PolarizationSample ps = sample_initial_polarization(spec.n_atoms, d_t0_sq, rng);
            cplx j12_0 = ps.kappa * std::polar(1.0, ps.phi) / (double)spec.n_atoms;
            if (std::abs(j12_0) > 0.5) j12_0 *= 0.5 / std::abs(j12_0); // O(e^-N) tail guard
            CollectiveState init{std::sqrt(std::max(0.0, 1.0 - 4.0 * std::norm(j12_0))), j12_0};

            detail::MeanfieldDriver drv;
            if (free_space) drv.gamma = std::get<FreeSpace>(spec.model).gamma;
            else drv.weights = &shared;
            drv.delta_bare = bare_detuning(spec.model, spec.delta_c);
            TimeSeries tail = drv.run(init, subgrid);

            auto state_at = [&](int k) -> const CollectiveState& {
                return k <= k0 ? (k == k0 ? tail.states[0] : init) : tail.states[k - k0];
            };
            // held segment before handoff uses the initial state itself
            for (int k = 0; k <= n; ++k) {
                const CollectiveState& s = state_at(k);
                sum_j3[c][k] += s.j3;
                sum_j12[c][k] += s.j12;
                if (delay[r] < 0.0 && s.j3 <= 0.0) delay[r] = k * h;
            }
            for (std::size_t si = 0; si < snap_idx.size(); ++si) {
                const CollectiveState& s = state_at(snap_idx[si]);
                double kap = std::abs(s.j12) * spec.n_atoms;
                double ph = std::atan2(s.j12.imag(), s.j12.real());
                if (ph < 0.0) ph += 2.0 * pi;
                snaps[si][r] = {kap, ph};
            }
        }
    });

    EnsembleStats out;
    out.grid = spec.grid;
    out.tau0 = tau0;
    out.mean_inversion.assign(n + 1, 0.0);
    out.mean_polarization.assign(n + 1, cplx(0.0));
    for (int c = 0; c < n_chunks; ++c)
        for (int k = 0; k <= n; ++k) {
            out.mean_inversion[k] += sum_j3[c][k];
            out.mean_polarization[k] += sum_j12[c][k];
        }
    out.mean_polarization_modulus.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        out.mean_inversion[k] /= spec.n_realizations;
        out.mean_polarization[k] /= (double)spec.n_realizations;
        out.mean_polarization_modulus[k] = std::abs(out.mean_polarization[k]);
    }
    double dmax = spec.delay_max > 0.0 ? spec.delay_max : spec.grid.tau_max;
    out.delay_histogram = Histogram{0.0, dmax, std::vector<long>(spec.delay_bins, 0), 0};
    for (double d : delay) {
        if (d < 0.0) ++out.delay_histogram.overflow;
        else out.delay_histogram.add(d);
    }
    for (std::size_t si = 0; si < snap_idx.size(); ++si)
        out.polarization_snapshots.emplace_back(snap_idx[si] * h, std::move(snaps[si]));
    return out;
}

} // namespace pbg
