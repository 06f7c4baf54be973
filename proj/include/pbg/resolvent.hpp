#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "complex_math.hpp"
#include "model.hpp"

namespace pbg {

// Shared machinery for the two isotropic resolvents
//   decay:  Btilde(s) = [s + Gtilde(s)]^{-1}   (sigma = +1)
//   gain:   Dtilde(s) = [s - Gtilde(s)]^{-1}   (sigma = -1)
// with Gtilde(s) = e^{-i pi/4} / sqrt(s - i delta_c).  Substituting
// s = x^2 + i delta_c turns the pole condition into the cubic
//   x^3 + i delta_c x + sigma e^{-i pi/4} = 0.
// The inverse transform collapses to exponentials and Faddeeva functions
// through the residue weights a_j = x_j / prod_{k != j} (x_j - x_k).

struct ResolventRoots {
    std::array<cplx, 3> x;
    std::array<cplx, 3> a; // residue weights, sum a_j = 0, sum a_j x_j = 1
    std::array<cplx, 3> y; // principal sqrt of x_j^2 (selects the sheet)
    double delta_c = 0.0;
    int sigma = +1;
};

namespace detail {

// roots of x^3 + p x + q via Cardano, then Newton-polished
inline std::array<cplx, 3> cubic_roots(cplx p, cplx q) {
    std::array<cplx, 3> r;
    cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx u = -q / 2.0 + disc;
    if (std::abs(u) < 1e-30) u = -q / 2.0 - disc;
    cplx c = std::pow(u, 1.0 / 3.0);
    const cplx w1 = std::polar(1.0, 2.0 * pi / 3.0);
    for (int j = 0; j < 3; ++j) {
        cplx cj = c * (j == 0 ? cplx(1.0) : (j == 1 ? w1 : w1 * w1));
        cplx xj = cj - p / (3.0 * cj);
        for (int it = 0; it < 40; ++it) {
            cplx f = xj * xj * xj + p * xj + q;
            cplx df = 3.0 * xj * xj + p;
            cplx step = f / df;
            xj -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(xj))) break;
        }
        r[j] = xj;
    }
    return r;
}

} // namespace detail

inline ResolventRoots solve_resolvent_roots(double delta_c, int sigma) {
    if (!std::isfinite(delta_c)) throw std::domain_error("solve_resolvent_roots: non-finite detuning");
    ResolventRoots out;
    out.delta_c = delta_c;
    out.sigma = sigma;
    cplx q = (sigma >= 0 ? 1.0 : -1.0) * exp_m_i_pi_4;
    out.x = detail::cubic_roots(cplx(0.0, delta_c), q);
    for (int j = 0; j < 3; ++j) {
        cplx prod = 1.0;
        for (int k = 0; k < 3; ++k)
            if (k != j) prod *= out.x[j] - out.x[k];
        out.a[j] = out.x[j] / prod;
        out.y[j] = std::sqrt(out.x[j] * out.x[j]);
        // defining-equation residual on the root's own sheet
        cplx res = out.x[j] * out.x[j] * out.x[j] + cplx(0.0, delta_c) * out.x[j] + q;
        if (std::abs(res) > 1e-10)
            throw std::runtime_error("solve_resolvent_roots: residual above 1e-10");
    }
    return out;
}

// F(tau) = e^{i delta_c tau} sum_j a_j [ (x_j + y_j) e^{x_j^2 tau} - y_j w(i y_j sqrt(tau)) ]
// equals B(tau) for sigma=+1 and D(tau) for sigma=-1; F(0) = 1 because
// sum a_j x_j = 1 and sum a_j = 0.  Re(y_j) >= 0 keeps the w-arguments in
// the upper half plane.
inline cplx resolvent_amplitude(const ResolventRoots& r, double tau) {
    if (tau < 0.0) throw std::domain_error("resolvent_amplitude: tau must be >= 0");
    if (tau == 0.0) return 1.0;
    double st = std::sqrt(tau);
    cplx sum = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx ex = std::exp(r.x[j] * r.x[j] * tau);
        cplx wf = faddeeva_w(cplx(0.0, 1.0) * r.y[j] * st);
        sum += r.a[j] * ((r.x[j] + r.y[j]) * ex - r.y[j] * wf);
    }
    return std::polar(1.0, r.delta_c * tau) * sum;
}

} // namespace pbg
