#pragma once

#include <cmath>
#include <vector>

#include "complex_math.hpp"

namespace pbg {

// Product-integration weights for the history sum
//   I_k = int_0^{tau_k} K(tau_k - t') g(t') dt'
//       = sum_{j<k} lo[k-j-1] g_j + hi[k-j-1] g_{j+1}
// where g is interpolated linearly on each cell and the (possibly weakly
// singular) kernel factor K is integrated exactly against it.  Detuning
// phases are deliberately *not* part of K: callers fold them into g, which
// keeps g smooth and the weights detuning-independent (one table serves a
// whole ensemble).
struct VolterraWeights {
    double h = 0.0;
    std::vector<cplx> lo, hi;

    int cells() const { return (int)lo.size(); }
};

// isotropic band-edge kernel K(u) = e^{-i pi/4} / sqrt(pi u):
// cell moments have closed forms, M0 = 2(sqrt(u2)-sqrt(u1)) etc.
inline VolterraWeights isotropic_weights(int n, double h) {
    VolterraWeights w;
    w.h = h;
    w.lo.resize(n);
    w.hi.resize(n);
    const cplx pref = exp_m_i_pi_4 / sqrt_pi;
    double sq_prev = 0.0;
    for (int i = 0; i < n; ++i) {
        double u1 = i * h, u2 = (i + 1) * h;
        double sq2 = std::sqrt(u2);
        double m0 = 2.0 * (sq2 - sq_prev);
        double m1 = (2.0 / 3.0) * (u2 * sq2 - u1 * sq_prev);
        double c = (i + 1) * m0 - m1 / h;
        w.hi[i] = pref * c;
        w.lo[i] = pref * (m0 - c);
        sq_prev = sq2;
    }
    return w;
}

namespace detail {
// 12-point Gauss-Legendre nodes/weights on [-1, 1]
inline const double gl_x[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                               0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
inline const double gl_w[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                               0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
} // namespace detail

// weights for an arbitrary kernel K(u) with at worst a u^{-1/2} singularity
// at u = 0: the first cell is integrated in the variable u = w^2, which
// regularizes the endpoint; later cells use plain Gauss-Legendre
template <class Kernel>
VolterraWeights generic_weights(Kernel&& K, int n, double h) {
    VolterraWeights w;
    w.h = h;
    w.lo.resize(n);
    w.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        cplx m0 = 0.0, m1 = 0.0;
        if (i == 0) {
            double b = std::sqrt(h);
            for (int j = 0; j < 6; ++j) {
                for (double sgn : {-1.0, 1.0}) {
                    double t = 0.5 * b * (1.0 + sgn * detail::gl_x[j]);
                    double u = t * t;
                    cplx val = 2.0 * t * K(u) * (0.5 * b * detail::gl_w[j]);
                    m0 += val;
                    m1 += val * u;
                }
            }
        } else {
            double c = (i + 0.5) * h;
            for (int j = 0; j < 6; ++j) {
                for (double sgn : {-1.0, 1.0}) {
                    double u = c + sgn * 0.5 * h * detail::gl_x[j];
                    cplx val = K(u) * (0.5 * h * detail::gl_w[j]);
                    m0 += val;
                    m1 += val * u;
                }
            }
        }
        cplx c = (double)(i + 1) * m0 - m1 / h;
        w.hi[i] = c;
        w.lo[i] = m0 - c;
    }
    return w;
}

// history sum at step k over the folded samples g_0..g_k
inline cplx history_sum(const VolterraWeights& w, const std::vector<cplx>& g, int k) {
    double sr = 0.0, si = 0.0;
    const cplx* lo = w.lo.data();
    const cplx* hi = w.hi.data();
    const cplx* gd = g.data();
    for (int j = 0; j < k; ++j) {
        const cplx& wl = lo[k - j - 1];
        const cplx& wh = hi[k - j - 1];
        const cplx& a = gd[j];
        const cplx& b = gd[j + 1];
        sr += wl.real() * a.real() - wl.imag() * a.imag() + wh.real() * b.real() - wh.imag() * b.imag();
        si += wl.real() * a.imag() + wl.imag() * a.real() + wh.real() * b.imag() + wh.imag() * b.real();
    }
    return {sr, si};
}

} // namespace pbg
