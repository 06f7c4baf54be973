#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "resolvent.hpp"

namespace pbg {

// Low-excitation (single shared excitation) dynamics: the collective
// polarization amplitude is the inverse Laplace transform of
// [s + Gtilde(s)]^{-1}, which closes in exponentials and Faddeeva functions
// through the resolvent roots.  All quantities in collective units.

struct OscillatorSolution {
    ResolventRoots roots; // sigma = +1 (decay branch)
};

inline OscillatorSolution solve_roots(Detuning delta_c) {
    return {solve_resolvent_roots(delta_c.value, +1)};
}

inline cplx amplitude_B(const OscillatorSolution& sol, double tau) {
    return resolvent_amplitude(sol.roots, tau);
}

// model-dispatching form; FreeSpace has the exact exponential baseline
inline cplx amplitude_B(const BandEdgeModel& model, Detuning delta_c, double tau) {
    if (tau < 0.0) throw std::domain_error("amplitude_B: tau must be >= 0");
    if (auto* fs = std::get_if<FreeSpace>(&model))
        return std::exp(-0.5 * fs->gamma * tau);
    if (std::holds_alternative<IsotropicEffMass>(model))
        return amplitude_B(solve_roots(delta_c), tau);
    throw std::domain_error(
        "amplitude_B: closed form available for FreeSpace and IsotropicEffMass only; "
        "use the discrete-mode oracle for other models");
}

inline double excited_population(const OscillatorSolution& sol, double tau) {
    double p = std::norm(amplitude_B(sol, tau));
    // clip the last-digit excursions of the Faddeeva evaluation
    if (p < 0.0) p = 0.0;
    if (p > 1.0 && p < 1.0 + 1e-9) p = 1.0;
    if (p > 1.0) throw std::runtime_error("excited_population: |B|^2 > 1 beyond tolerance");
    return p;
}

struct SpectrumCurve {
    std::vector<double> omega_grid; // offsets from the band edge, collective units
    std::vector<double> density;    // >= 0, zero at and below the edge
};

// steady-state emission spectrum into the band modes,
// S(x) = sqrt(x) / (1 + (x - delta_c)^2 x) for x = omega - omega_c > 0
inline SpectrumCurve emission_spectrum(Detuning delta_c, const std::vector<double>& omega_grid) {
    SpectrumCurve out;
    out.omega_grid = omega_grid;
    out.density.resize(omega_grid.size());
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        double x = omega_grid[i];
        if (!std::isfinite(x)) throw std::domain_error("emission_spectrum: non-finite grid point");
        double d = x - delta_c.value;
        out.density[i] = x > 0.0 ? std::sqrt(x) / (1.0 + d * d * x) : 0.0;
    }
    return out;
}

// Mandel Q parameter of the excited-state population statistics:
// Q(tau) = |B(tau)|^2 (Q(0) - 1) + 1
inline double mandel_q(const OscillatorSolution& sol, double tau, double q0) {
    if (q0 < 0.0) throw std::domain_error("mandel_q: Q(0) must be >= 0");
    return excited_population(sol, tau) * (q0 - 1.0) + 1.0;
}

// Steady-state detector: |B|^2 sampled on [tau - window, tau]; steady when
// the spread falls below tol.  Returns the first such tau on the grid, or a
// negative value if never steady up to tau_max.
inline double steady_state_time(const OscillatorSolution& sol, double tau_max, double dtau = 0.05,
                                double window = 5.0, double tol = 1e-4) {
    int n = (int)std::llround(tau_max / dtau);
    int w = (int)std::llround(window / dtau);
    std::vector<double> p(n + 1);
    for (int k = 0; k <= n; ++k) p[k] = excited_population(sol, k * dtau);
    for (int k = w; k <= n; ++k) {
        double lo = 1e300, hi = -1e300;
        for (int j = k - w; j <= k; ++j) {
            lo = std::min(lo, p[j]);
            hi = std::max(hi, p[j]);
        }
        if (hi - lo < tol) return k * dtau;
    }
    return -1.0;
}

} // namespace pbg
