#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "complex_math.hpp"
#include "meanfield.hpp"
#include "model.hpp"
#include "timeseries.hpp"

namespace pbg {

// Brute-force verifier: the reservoir is discretized into explicit field
// modes and the coupled mode-atom equations are integrated directly, with
// no memory kernel.  Agreement with the kernel-based solvers is evidence
// for both, since the two share no numerical machinery.

struct DiscreteBath {
    std::vector<double> detunings;  // Delta_lambda = eps_lambda - delta(atom), collective units
    std::vector<double> couplings;  // g_lambda (real, >= 0)
    double counterterm = 0.0;       // Omega: adiabatic shift of the truncated UV tail
    double recurrence_time = 0.0;   // ~ 2 pi / (finest mode spacing); echoes beyond this
    int n_modes() const { return (int)detunings.size(); }
};

namespace detail {

// spectral weight of one cell [e1, e2] of the band continuum, i.e.
// int S(eps) d eps with S the kernel's spectral density, plus the
// S-weighted centroid used as the representative mode position
struct BathCell {
    double g2 = 0.0;
    double centroid = 0.0;
};

inline BathCell iso_cell(double e1, double e2) {
    // S(eps) = 1/(pi sqrt(eps))
    double s1 = std::sqrt(e1), s2 = std::sqrt(e2);
    BathCell c;
    c.g2 = (2.0 / pi) * (s2 - s1);
    c.centroid = (e2 * s2 - e1 * s1) / (3.0 * (s2 - s1));
    return c;
}

template <class Dens>
BathCell generic_cell(Dens&& S, double e1, double e2) {
    static const double xg[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                                 0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
    static const double wg[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                 0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    double m0 = 0.0, m1 = 0.0;
    double c = 0.5 * (e1 + e2), r = 0.5 * (e2 - e1);
    for (int j = 0; j < 6; ++j)
        for (double sgn : {-1.0, 1.0}) {
            double e = c + sgn * r * xg[j];
            double v = S(e) * r * wg[j];
            m0 += v;
            m1 += v * e;
        }
    return {m0, m0 > 0.0 ? m1 / m0 : c};
}

// composite edge grid: uniform cells of width w_fine on (0, e_fine], then
// geometrically widening cells up to the window W; n_modes splits roughly
// half/half between the two regions
inline std::vector<double> composite_edges(double W, int n_modes) {
    double e_fine = std::min(10.0, W);
    std::vector<double> edges{0.0};
    if (W <= 10.0) {
        double w = W / n_modes;
        for (int i = 1; i <= n_modes; ++i) edges.push_back(i * w);
        return edges;
    }
    int half = n_modes / 2;
    double w_fine = e_fine / half;
    for (int i = 1; i <= half; ++i) edges.push_back(i * w_fine);
    double gamma = std::log(W / e_fine) / half;
    double w = w_fine, e = e_fine;
    while (e < W) {
        w *= (1.0 + gamma);
        e = std::min(e + w, W);
        edges.push_back(e);
    }
    return edges;
}

} // namespace detail

inline DiscreteBath build_bath(const BandEdgeModel& model, Detuning delta_c, int n_modes,
                               double omega_window = 1e5) {
    validate(model);
    if (n_modes < 100) throw std::domain_error("build_bath: n_modes >= 100 required");
    if (!(omega_window > 0.0)) throw std::domain_error("build_bath: omega_window > 0 required");
    DiscreteBath bath;

    if (auto* fs = std::get_if<FreeSpace>(&model)) {
        // flat spectral density gamma/(2 pi) over a symmetric window around
        // the atomic line: the Markov limit
        double W = omega_window;
        double dw = W / n_modes;
        for (int i = 0; i < n_modes; ++i) {
            double e = -0.5 * W + (i + 0.5) * dw;
            bath.detunings.push_back(e);
            bath.couplings.push_back(std::sqrt(fs->gamma / (2.0 * pi) * dw));
        }
        bath.counterterm = 0.0;
        bath.recurrence_time = 2.0 * pi / dw;
        return bath;
    }

    if (auto* fd = std::get_if<IsotropicFull>(&model)) {
        // uniform k grid over (0, Lambda]: both dispersion branches included
        double lambda = fd->cutoff_mult * fd->k0;
        double dk = lambda / n_modes;
        double mid = std::sqrt(fd->k0 * fd->k0 + fd->gamma_k * fd->gamma_k);
        double w21 = fd->upper_edge() + delta_c.value;
        double pref = fd->prefactor();
        double min_spacing = 1e300;
        double prev = 0.0;
        for (int i = 0; i < n_modes; ++i) {
            double k = (i + 0.5) * dk;
            double q = k - fd->k0;
            double om = mid + (q >= 0 ? 1.0 : -1.0) * std::sqrt(q * q + fd->gamma_k * fd->gamma_k);
            bath.detunings.push_back(om - w21);
            bath.couplings.push_back(std::sqrt(pref * dk));
            if (i > 0) min_spacing = std::min(min_spacing, std::abs(om - prev));
            prev = om;
        }
        bath.counterterm = 0.0; // hard cutoff is part of the model definition
        bath.recurrence_time = 2.0 * pi / std::max(min_spacing, 1e-300);
        return bath;
    }

    const bool iso = std::holds_alternative<IsotropicEffMass>(model);
    const auto* an = std::get_if<AnisotropicEffMass>(&model);
    const double delta = bare_detuning(model, delta_c);
    auto edges = detail::composite_edges(omega_window, n_modes);
    double w_fine = edges[1] - edges[0];
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        detail::BathCell c =
            iso ? detail::iso_cell(edges[i], edges[i + 1])
                : detail::generic_cell(
                      [an](double e) {
                          return (2.0 / pi) * an->omega_c * std::sqrt(e) / (an->omega_c + e);
                      },
                      edges[i], edges[i + 1]);
        bath.detunings.push_back(c.centroid - delta);
        bath.couplings.push_back(std::sqrt(c.g2));
    }
    // adiabatic tail shift Omega = int_W^inf S(eps)/eps d eps
    if (iso) {
        bath.counterterm = (2.0 / pi) / std::sqrt(omega_window);
    } else {
        double rw = std::sqrt(omega_window / an->omega_c);
        bath.counterterm = (4.0 * std::sqrt(an->omega_c) / pi) * (0.5 * pi - std::atan(rw));
    }
    bath.recurrence_time = 2.0 * pi / w_fine;
    return bath;
}

enum class OracleMode { lowexc_decay, lowexc_gain, meanfield };

struct OracleRun {
    TimeSeries series;                   // meanfield: (j3, j12); lowexc: j3 = |b|^2, j12 = b
    std::vector<double> bath_occupation; // sum_lambda |c_lambda|^2 at each grid point
    double recurrence_time = 0.0;
    bool truncated_at_recurrence = false;
};

// Exponential integrator: the stiff mode rotation e^{-i Delta h} is applied
// exactly and the atomic source is integrated against it with linear
// interpolation over the step,
//   c_new = E c - i g [ j12 (I0 - I1) + j12' I1 ],
//   E = e^{-i Delta h}, I0 = (E-1)/(-i Delta), I1 = (E - 1 + i Delta h)/(-Delta^2 h).
// An explicit stepper would need dtau << 1/window to even be stable; this
// one is exact in the bath sector and second order in the coupling.
inline OracleRun oracle_evolve(const DiscreteBath& bath, OracleMode mode, TimeGrid grid,
                               CollectiveState init = {1.0, 0.0}) {
    const int M = bath.n_modes();
    if (M == 0) throw std::domain_error("oracle_evolve: empty bath");
    const int n = grid.steps();
    const double h = grid.dtau;
    const double Om = bath.counterterm;

    std::vector<cplx> E(M), I0(M), I1(M), c(M, cplx(0.0));
    for (int m = 0; m < M; ++m) {
        cplx z = cplx(0.0, -bath.detunings[m] * h);
        if (std::abs(z) < 1e-4) {
            E[m] = 1.0 + z * (1.0 + z * (0.5 + z / 6.0));
            I0[m] = h * (1.0 + z * (0.5 + z / 6.0));
            I1[m] = h * (0.5 + z * (1.0 / 3.0 + z / 8.0));
        } else {
            cplx e = std::exp(z);
            E[m] = e;
            I0[m] = (e - 1.0) / z * h;
            I1[m] = (e - 1.0 - z) / (z * z) * h;
        }
    }

    OracleRun out;
    out.recurrence_time = bath.recurrence_time;
    out.truncated_at_recurrence = grid.tau_max > bath.recurrence_time;
    out.series.grid = grid;
    out.series.states.resize(n + 1);
    out.bath_occupation.assign(n + 1, 0.0);

    auto field_sum = [&]() {
        double sr = 0.0, si = 0.0;
        for (int m = 0; m < M; ++m) {
            sr += bath.couplings[m] * c[m].real();
            si += bath.couplings[m] * c[m].imag();
        }
        return cplx(sr, si);
    };
    auto advance_modes = [&](cplx src0, cplx src1, std::vector<cplx>& dst) {
        for (int m = 0; m < M; ++m)
            dst[m] = E[m] * c[m] -
                     cplx(0.0, 1.0) * bath.couplings[m] * (src0 * (I0[m] - I1[m]) + src1 * I1[m]);
    };
    std::vector<cplx> c_new(M);

    const bool lin = mode != OracleMode::meanfield;
    const double fb = mode == OracleMode::lowexc_gain ? -1.0 : 1.0; // feedback sign
    cplx b = 1.0;       // low-excitation amplitude
    double j3 = init.j3;
    cplx j12 = init.j12;
    if (lin) out.series.states[0] = {std::norm(b), b};
    else out.series.states[0] = init;

    for (int k = 0; k < n; ++k) {
        if (lin) {
            cplx s0 = field_sum();
            cplx db = fb * (cplx(0.0, -1.0) * s0 + cplx(0.0, 1.0) * Om * b);
            cplx bp = b + h * db;
            for (int pass = 0; pass < 2; ++pass) {
                advance_modes(b, bp, c_new);
                double sr = 0.0, si = 0.0;
                for (int m = 0; m < M; ++m) {
                    sr += bath.couplings[m] * c_new[m].real();
                    si += bath.couplings[m] * c_new[m].imag();
                }
                cplx db1 = fb * (cplx(0.0, -1.0) * cplx(sr, si) + cplx(0.0, 1.0) * Om * bp);
                bp = b + 0.5 * h * (db + db1);
            }
            advance_modes(b, bp, c_new);
            c.swap(c_new);
            b = bp;
            out.series.states[k + 1] = {std::norm(b), b};
        } else {
            cplx s0 = field_sum();
            cplx d12 = cplx(0.0, 1.0) * (j3 * s0 + Om * j3 * j12);
            double d3 = 0.0;
            for (int m = 0; m < M; ++m)
                d3 += bath.couplings[m] * (std::conj(c[m]) * j12).imag();
            d3 *= -4.0;
            cplx j12p = j12 + h * d12;
            double j3p = j3 + h * d3;
            for (int pass = 0; pass < 2; ++pass) {
                advance_modes(j12, j12p, c_new);
                double sr = 0.0, si = 0.0, d3b = 0.0;
                for (int m = 0; m < M; ++m) {
                    sr += bath.couplings[m] * c_new[m].real();
                    si += bath.couplings[m] * c_new[m].imag();
                    d3b += bath.couplings[m] * (std::conj(c_new[m]) * j12p).imag();
                }
                cplx d12b = cplx(0.0, 1.0) * (j3p * cplx(sr, si) + Om * j3p * j12p);
                d3b *= -4.0;
                j12p = j12 + 0.5 * h * (d12 + d12b);
                j3p = j3 + 0.5 * h * (d3 + d3b);
            }
            advance_modes(j12, j12p, c_new);
            c.swap(c_new);
            j12 = j12p;
            j3 = j3p;
            out.series.states[k + 1] = {j3, j12};
        }
        double occ = 0.0;
        for (int m = 0; m < M; ++m) occ += std::norm(c[m]);
        out.bath_occupation[k + 1] = occ;
    }
    return out;
}

// pointwise kernel reconstruction sum_lambda g^2 e^{-i Delta dtau}, for
// diagnostics: on wide composite windows the incoherent tail dominates
// pointwise values even though the dynamics stay accurate
inline cplx bath_kernel(const DiscreteBath& bath, double dtau) {
    cplx acc = 0.0;
    for (int m = 0; m < bath.n_modes(); ++m)
        acc += (double)bath.couplings[m] * bath.couplings[m] *
               std::polar(1.0, -bath.detunings[m] * dtau);
    return acc;
}

} // namespace pbg
