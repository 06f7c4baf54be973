#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "complex_math.hpp"
#include "model.hpp"

namespace pbg {

// Dimensionless anisotropic band-edge kernel bracket,
//   F(v) = sqrt(pi/(iv)) - pi e^{iv} erfc(sqrt(iv)),   v = omega_c * dt,
// evaluated through w(z): e^{iv} erfc(sqrt(iv)) = w(e^{i 3pi/4} sqrt(v)),
// whose argument stays in the upper half plane for all v > 0.
// Returned value includes the detuning phase e^{i delta_c dt}.
// Short times (v < 1e-2) go through the Maclaurin expansion of w, which is
// the v -> 0+ short-time form: F(v) = sqrt(pi/(iv)) - pi + O(sqrt(v)).
// Large v falls off like v^{-3/2}: F(v) ~ (sqrt(pi)/2) e^{-i 3pi/4} v^{-3/2}.
inline cplx full_anisotropic_kernel(double omega_c_dt, double delta_c_dt) {
    if (!(omega_c_dt > 0.0) || !std::isfinite(omega_c_dt) || !std::isfinite(delta_c_dt))
        throw std::domain_error("full_anisotropic_kernel: need finite inputs, omega_c_dt > 0");
    const double v = omega_c_dt;
    const double sv = std::sqrt(v);
    cplx head = sqrt_pi * exp_m_i_pi_4 / sv; // sqrt(pi/(iv))
    cplx z = cplx(-std::sqrt(0.5), std::sqrt(0.5)) * sv; // e^{i 3pi/4} sqrt(v)
    cplx tail = (v < 1e-2) ? pi * faddeeva_w_series(z) : pi * faddeeva_w(z);
    cplx phase = std::polar(1.0, delta_c_dt);
    return (head - tail) * phase;
}

// Two-branch model-dispersion kernel: oscillatory k-integral
//   K(dt) = C e^{i omega_21 dt} int_0^Lambda e^{-i omega(k) dt} dk
// with omega(k) from IsotropicFull.  Panels are sized to resolve the phase;
// 12-point Gauss-Legendre per panel.
inline cplx full_dispersion_kernel(const IsotropicFull& m, Detuning delta_c, double dtau) {
    if (!(dtau > 0.0)) throw std::domain_error("full_dispersion_kernel: dtau must be > 0");
    static const double xg[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                                 0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
    static const double wg[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                 0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    const double w21 = m.upper_edge() + delta_c.value;
    const double mid = std::sqrt(m.k0 * m.k0 + m.gamma_k * m.gamma_k);
    auto omega = [&](double k) {
        double q = k - m.k0;
        return mid + (q >= 0 ? 1.0 : -1.0) * std::sqrt(q * q + m.gamma_k * m.gamma_k);
    };
    const double lambda = m.cutoff_mult * m.k0;
    // phase advances at most ~dtau per unit k (group slope <= 1 in c=1 units)
    double panel = std::min(0.1 * m.k0, 1.5 / dtau);
    int n_panels = std::max(16, (int)std::ceil(lambda / panel));
    if (n_panels > 4'000'000)
        throw std::runtime_error("full_dispersion_kernel: quadrature would not converge at this dtau");
    double h = lambda / n_panels;
    cplx acc = 0.0;
    for (int p = 0; p < n_panels; ++p) {
        double c = (p + 0.5) * h;
        for (int j = 0; j < 6; ++j) {
            for (double sgn : {-1.0, 1.0}) {
                double k = c + sgn * 0.5 * h * xg[j];
                double ph = (w21 - omega(k)) * dtau;
                acc += wg[j] * cplx(std::cos(ph), std::sin(ph));
            }
        }
    }
    acc *= 0.5 * h;
    return m.prefactor() * acc;
}

// Memory kernel G(dtau) in collective dimensionless units.
inline cplx memory_kernel(const BandEdgeModel& model, Detuning delta_c, double dtau) {
    if (!(dtau > 0.0) || !std::isfinite(dtau))
        throw std::domain_error("memory_kernel: dtau must be finite and > 0");
    if (std::holds_alternative<FreeSpace>(model))
        throw std::domain_error(
            "memory_kernel: FreeSpace is a singular (delta-function) kernel; "
            "use the Markovian code path instead of pointwise sampling");
    if (auto* iso = std::get_if<IsotropicEffMass>(&model)) {
        (void)iso;
        return exp_m_i_pi_4 * std::polar(1.0, delta_c.value * dtau) / std::sqrt(pi * dtau);
    }
    if (auto* an = std::get_if<AnisotropicEffMass>(&model)) {
        double bare = delta_c.value + an->edge_shift;
        double wc = an->omega_c;
        return (2.0 / pi) * std::pow(wc, 1.5) *
               full_anisotropic_kernel(wc * dtau, bare * dtau);
    }
    return full_dispersion_kernel(std::get<IsotropicFull>(model), delta_c, dtau);
}

// Laplace transform of the memory kernel; principal branch, cut along
// s = i*delta_c - R+.
inline cplx kernel_laplace(const BandEdgeModel& model, Detuning delta_c, cplx s) {
    if (auto* fs = std::get_if<FreeSpace>(&model))
        return 0.5 * fs->gamma; // transform of (gamma/2) delta(t-t')
    if (std::holds_alternative<IsotropicEffMass>(model)) {
        cplx u = s - cplx(0.0, delta_c.value);
        if (u.imag() == 0.0 && u.real() <= 0.0)
            throw std::domain_error("kernel_laplace: s on the branch cut");
        return exp_m_i_pi_4 / std::sqrt(u);
    }
    if (auto* an = std::get_if<AnisotropicEffMass>(&model)) {
        double bare = delta_c.value + an->edge_shift;
        double wc = an->omega_c;
        cplx u = cplx(0.0, -1.0) * (s - cplx(0.0, bare));
        if (u.imag() == 0.0 && u.real() <= 0.0)
            throw std::domain_error("kernel_laplace: s on the branch cut");
        double rwc = std::sqrt(wc);
        return cplx(0.0, -2.0) * wc / (rwc + std::sqrt(u));
    }
    throw std::domain_error("kernel_laplace: no closed form for IsotropicFull");
}

} // namespace pbg
