#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace pbg {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline const double sqrt_pi = std::sqrt(pi);

// e^{-i pi/4} and friends, used all over the kernel algebra
inline const cplx exp_m_i_pi_4 = {std::sqrt(0.5), -std::sqrt(0.5)};
inline const cplx exp_p_i_pi_4 = {std::sqrt(0.5), std::sqrt(0.5)};

// Scaled complementary error function w(z) = exp(-z^2) erfc(-iz),
// rational approximation on the upper half plane (Weideman-style: pole
// expansion of exp(-t^2) after a Mobius map).  Coefficients are produced
// once at startup from a plain DFT; degree 48 keeps the relative error
// near 1e-14 for Im z >= 0, which is the only region the library needs.
namespace detail {

template <int N = 48>
struct faddeeva_table {
    double L;
    std::array<double, N> a;

    faddeeva_table() {
        constexpr int M = 2 * N;
        constexpr int M2 = 2 * M;
        L = std::sqrt(N / std::sqrt(2.0));
        // sample f(theta) = exp(-t^2) (L^2 + t^2), t = L tan(theta/2)
        std::array<double, M2> f{};
        for (int k = -M + 1; k <= M - 1; ++k) {
            double theta = k * pi / M;
            double t = L * std::tan(0.5 * theta);
            f[k + M] = std::exp(-t * t) * (L * L + t * t);
        }
        // f[0] corresponds to theta = -pi where the sample vanishes
        for (int j = 1; j <= N; ++j) {
            double acc = 0.0;
            for (int m = 0; m < M2; ++m)
                acc += f[m] * std::cos(2.0 * pi * j * (m - M) / M2);
            a[N - j] = acc / M2;
        }
    }
};

inline const faddeeva_table<48>& faddeeva_coeffs() {
    static const faddeeva_table<48> tbl;
    return tbl;
}

} // namespace detail

// w(z) for Im z >= 0 (throws otherwise; callers in this library always
// stay in the closed upper half plane).
inline cplx faddeeva_w(cplx z) {
    if (z.imag() < -1e-15)
        throw std::domain_error("faddeeva_w: argument below the real axis");
    if (z.imag() < 0.0) z = {z.real(), 0.0};
    const auto& tbl = detail::faddeeva_coeffs();
    const double L = tbl.L;
    cplx iz = cplx(0.0, 1.0) * z;
    cplx Z = (L + iz) / (L - iz);
    cplx p = 0.0;
    for (double c : tbl.a) p = p * Z + c;
    return 2.0 * p / ((L - iz) * (L - iz)) + (1.0 / sqrt_pi) / (L - iz);
}

// Small-|z| Maclaurin series of w(z): sum_n (iz)^n / Gamma(n/2 + 1).
// Kept as an independent cross-check for the rational approximation.
inline cplx faddeeva_w_series(cplx z, int terms = 60) {
    cplx iz = cplx(0.0, 1.0) * z;
    cplx term = 1.0, sum = 1.0;
    // Gamma(n/2+1) recursion split over even/odd n
    for (int n = 1; n < terms; ++n) {
        term *= iz;
        sum += term / std::tgamma(0.5 * n + 1.0);
    }
    return sum;
}

// erfc(z) for arbitrary complex z with Re z >= 0 via erfc(z) = e^{-z^2} w(iz)
inline cplx erfc_complex(cplx z) {
    if (z.real() < 0.0)
        return 2.0 - erfc_complex(-z);
    return std::exp(-z * z) * faddeeva_w(cplx(0.0, 1.0) * z);
}

// principal square root that keeps Re >= 0
inline cplx sqrt_principal(cplx z) { return std::sqrt(z); }

} // namespace pbg
