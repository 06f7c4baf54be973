#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "meanfield.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "timeseries.hpp"

namespace pbg {

// Classical colored noise mimicking the band-edge vacuum fluctuations:
// Rice's spectral method,
//   xi(tau) = 2 sum_{n=1}^{n_terms} sqrt(P(omega_n) d_omega) cos(omega_n tau + Phi_n),
//   omega_n = n d_omega, d_omega = omega_max / n_terms, Phi_n ~ U[0, 2pi).
// The ensemble autocorrelation of this sum is the closed form
//   2 d_omega sum_n P(omega_n) cos(omega_n dtau),
// whose continuum limit must reproduce dtau^{-1/2} for alpha = 1.  That
// fixes the default spectrum to P(omega) = 1/sqrt(2 pi omega): the
// cosine-transform identity integral_0^inf cos(wt)/sqrt(w) dw = sqrt(pi/2t)
// then gives exactly t^{-1/2}.  (The often-quoted sqrt(pi/(2 omega)) form
// overshoots the target autocorrelation by a factor pi.)
struct NoiseSpec {
    int alpha = 1;                   // 1: isotropic edge; 3: anisotropic (experimental)
    int n_terms = 1000;
    double omega_max = 2.0 * pi * 100.0;
    std::uint64_t seed = 0;
    // alpha=3 short-lag regularization scale (kernel crossover), only used
    // when alpha == 3; see spectral_density below
    double omega_c = 0.01;
};

inline void validate(const NoiseSpec& s) {
    if (s.alpha != 1 && s.alpha != 3)
        throw std::domain_error("NoiseSpec: alpha must be 1 or 3");
    if (s.n_terms < 1) throw std::domain_error("NoiseSpec: n_terms >= 1 required");
    if (!(s.omega_max > 0.0)) throw std::domain_error("NoiseSpec: omega_max > 0 required");
}

// one-sided power spectrum P(omega)
inline double noise_spectrum(const NoiseSpec& s, double omega) {
    if (!(omega > 0.0)) throw std::domain_error("noise_spectrum: omega > 0 required");
    if (s.alpha == 1) return 1.0 / std::sqrt(2.0 * pi * omega);
    // alpha = 3 (experimental): cosine-transform pair of the dtau^{-3/2}
    // long-lag decay with the short-lag crossover of the anisotropic kernel
    // bracket; shape sqrt(omega)/(omega_c + omega) normalized like alpha=1
    // at omega = 1
    double shape = std::sqrt(omega) / (s.omega_c + omega);
    double norm = (1.0 + s.omega_c) / std::sqrt(2.0 * pi); // matches alpha=1 at omega=1
    return norm * shape;
}

struct NoisePath {
    TimeGrid grid;
    std::vector<double> xi;
};

// deterministic given (spec.seed); the cosines are advanced by per-step
// complex rotations (one table of unit rotors), not by calling cos at every
// (term, step) pair
inline NoisePath generate_noise(const NoiseSpec& spec, TimeGrid grid) {
    validate(spec);
    const int n = grid.steps();
    const double h = grid.dtau;
    const double dw = spec.omega_max / spec.n_terms;
    SplitMix64 rng(spec.seed);
    NoisePath out;
    out.grid = grid;
    out.xi.assign(n + 1, 0.0);
    std::vector<cplx> z(spec.n_terms), rot(spec.n_terms);
    std::vector<double> amp(spec.n_terms);
    for (int t = 0; t < spec.n_terms; ++t) {
        double w = (t + 1) * dw;
        amp[t] = 2.0 * std::sqrt(noise_spectrum(spec, w) * dw);
        double phi = rng.next_angle();
        z[t] = std::polar(1.0, phi);
        rot[t] = std::polar(1.0, w * h);
    }
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int t = 0; t < spec.n_terms; ++t) {
            s += amp[t] * z[t].real();
            z[t] *= rot[t];
        }
        out.xi[k] = s;
    }
    return out;
}

// analytic ensemble autocorrelation of the cosine sum (phases marginalized)
inline double analytic_autocorrelation(const NoiseSpec& spec, double lag) {
    validate(spec);
    const double dw = spec.omega_max / spec.n_terms;
    double acc = 0.0;
    for (int t = spec.n_terms; t >= 1; --t) acc += noise_spectrum(spec, t * dw) * std::cos(t * dw * lag);
    return 2.0 * dw * acc;
}

// ensemble autocorrelation <xi(tau) xi(tau + lag)> averaged over paths and
// a base-time set spanning the usable part of the grid
inline std::vector<double> autocorrelation(const std::vector<NoisePath>& paths,
                                           const std::vector<double>& lags) {
    if (paths.size() < 2) throw std::domain_error("autocorrelation: need >= 2 paths");
    const TimeGrid g = paths.front().grid;
    const int n = g.steps();
    for (const auto& p : paths)
        if (p.grid.dtau != g.dtau || (int)p.xi.size() != n + 1)
            throw std::domain_error("autocorrelation: paths must share a common grid");
    int max_lag_idx = 0;
    std::vector<int> lag_idx;
    for (double l : lags) {
        int li = (int)std::llround(l / g.dtau);
        if (li < 0 || li > n) throw std::domain_error("autocorrelation: lag outside grid");
        lag_idx.push_back(li);
        max_lag_idx = std::max(max_lag_idx, li);
    }
    const int n_base = n - max_lag_idx + 1;
    if (n_base < 1) throw std::domain_error("autocorrelation: grid shorter than max lag");
    std::vector<double> out(lags.size(), 0.0);
    for (std::size_t i = 0; i < lag_idx.size(); ++i) {
        double acc = 0.0;
        for (const auto& p : paths)
            for (int b = 0; b < n_base; ++b) acc += p.xi[b] * p.xi[b + lag_idx[i]];
        out[i] = acc / ((double)paths.size() * n_base);
    }
    return out;
}

// Stochastic mean-field evolution from the fully inverted, unpolarized
// state: the deterministic Volterra part is identical to evolve_meanfield,
// plus the classical noise drive
//   zeta(tau) = xi(tau) e^{-i(pi/8 - delta_c tau)} / sqrt(N sqrt(pi))
// added to the convolution term in both equations.  The 1/sqrt(N) scaling
// is exact and inspectable: doubling n_atoms scales the drive by 1/sqrt(2).
inline TimeSeries evolve_stochastic(const BandEdgeModel& model, Detuning delta_c, int n_atoms,
                                    TimeGrid grid, const NoiseSpec& spec,
                                    CollectiveState init = {1.0, 0.0},
                                    const VolterraWeights* shared_weights = nullptr,
                                    const NoisePath* shared_path = nullptr) {
    validate(model);
    validate(spec);
    if (n_atoms <= 500)
        throw std::domain_error(
            "evolve_stochastic: n_atoms > 500 required (the classical-noise replacement of "
            "vacuum fluctuations is only quantitative for large ensembles)");
    NoisePath own_path;
    if (!shared_path) {
        own_path = generate_noise(spec, grid);
        shared_path = &own_path;
    }
    if ((int)shared_path->xi.size() < grid.steps() + 1 || shared_path->grid.dtau != grid.dtau)
        throw std::domain_error("evolve_stochastic: noise path grid mismatch");
    const double scale = 1.0 / std::sqrt((double)n_atoms * sqrt_pi);
    const double db = bare_detuning(model, delta_c);
    const double h = grid.dtau;
    const std::vector<double>& xi = shared_path->xi;

    detail::MeanfieldDriver drv;
    VolterraWeights own;
    if (auto* fs = std::get_if<FreeSpace>(&model)) {
        drv.gamma = fs->gamma;
    } else if (shared_weights && shared_weights->cells() >= grid.steps() &&
               shared_weights->h == grid.dtau) {
        drv.weights = shared_weights;
    } else {
        own = make_weights(model, grid.steps(), grid.dtau);
        drv.weights = &own;
    }
    drv.delta_bare = db;
    drv.norm_tol = 5e-2; // see MeanfieldDriver::norm_tol: fast noise components
                         // are projected out of the conserved Bloch norm
    drv.j3_cap = 1.0 + drv.norm_tol;
    drv.zeta = [scale, db, h, &xi](int k) {
        return xi[k] * scale * std::polar(1.0, db * k * h - pi / 8.0);
    };
    return drv.run(init, grid);
}

} // namespace pbg
