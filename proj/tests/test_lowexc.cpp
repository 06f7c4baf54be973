#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pbg/lowexc.hpp"
#include "pbg/volterra.hpp"

using namespace pbg;

TEST_CASE("resolvent roots: defining cubic and weight identities") {
    for (double dc : {-1.0, 0.0, 1.0}) {
        for (int sigma : {+1, -1}) {
            ResolventRoots r = solve_resolvent_roots(dc, sigma);
            cplx q = (sigma >= 0 ? 1.0 : -1.0) * exp_m_i_pi_4;
            cplx sa = 0.0, sax = 0.0;
            for (int j = 0; j < 3; ++j) {
                cplx res = r.x[j] * r.x[j] * r.x[j] + cplx(0.0, dc) * r.x[j] + q;
                REQUIRE(std::abs(res) < 1e-10);
                REQUIRE(r.y[j].real() >= 0.0); // upper-half-plane w arguments
                sa += r.a[j];
                sax += r.a[j] * r.x[j];
            }
            REQUIRE(std::abs(sa) < 1e-10);        // sum a_j = 0
            REQUIRE(std::abs(sax - 1.0) < 1e-10); // sum a_j x_j = 1
        }
    }
}

TEST_CASE("amplitude B: initial value and FreeSpace dispatch") {
    for (double dc : {-2.0, 0.0, 2.0})
        REQUIRE(std::abs(amplitude_B(solve_roots(Detuning{dc}), 0.0) - 1.0) < 1e-12);
    FreeSpace fs{0.8};
    for (double tau : {0.0, 1.0, 4.0})
        REQUIRE(std::abs(amplitude_B(BandEdgeModel{fs}, Detuning{0.0}, tau) -
                         std::exp(-0.4 * tau)) < 1e-12);
    REQUIRE_THROWS_AS(amplitude_B(BandEdgeModel{AnisotropicEffMass{}}, Detuning{0.0}, 1.0),
                      std::domain_error);
}

TEST_CASE("population balance: emitted fraction equals the kernel double integral") {
    // 1 - |B(tau)|^2 must equal 2 Re int_0^tau dt conj(B(t)) int_0^t dt' G(t-t') B(t')
    // at every grid point; inner integral by product integration, outer by
    // the trapezoid rule.  Completely independent of the Faddeeva route used
    // to produce B itself.
    const double h = 0.002;
    const int n = 5000; // tau <= 10
    VolterraWeights w = isotropic_weights(n, h);
    for (double dc : {-1.0, 0.0, 1.0}) {
        OscillatorSolution sol = solve_roots(Detuning{dc});
        std::vector<cplx> B(n + 1), g(n + 1);
        for (int k = 0; k <= n; ++k) {
            B[k] = amplitude_B(sol, k * h);
            g[k] = B[k] * std::polar(1.0, -dc * k * h); // fold the detuning phase
        }
        double acc = 0.0, maxerr = 0.0;
        cplx I_prev = 0.0;
        for (int k = 1; k <= n; ++k) {
            cplx I = std::polar(1.0, dc * k * h) * history_sum(w, g, k);
            acc += 0.5 * h * (2.0 * (std::conj(B[k - 1]) * I_prev).real() +
                              2.0 * (std::conj(B[k]) * I).real());
            I_prev = I;
            maxerr = std::max(maxerr, std::abs((1.0 - std::norm(B[k])) - acc));
        }
        REQUIRE(maxerr < 1e-4);
    }
}

TEST_CASE("excited population: range, steady state and deep-gap bound state") {
    OscillatorSolution sol0 = solve_roots(Detuning{0.0});
    for (int k = 0; k <= 400; ++k) {
        double p = excited_population(sol0, k * 0.1);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
    }
    double ts = steady_state_time(sol0, 400.0);
    REQUIRE(ts == Catch::Approx(361.45).margin(1.0));
    REQUIRE(excited_population(sol0, 400.0) == Catch::Approx(0.4445).margin(0.002));

    // far inside the gap the excitation stays mostly bound
    OscillatorSolution deep = solve_roots(Detuning{-5.0});
    double p150 = excited_population(deep, 150.0), p200 = excited_population(deep, 200.0);
    REQUIRE(p200 == Catch::Approx(0.9255).margin(0.003));
    REQUIRE(std::abs(p200 - p150) < 5e-4);
}

TEST_CASE("emission spectrum: anchors and edge behaviour") {
    std::vector<double> grid{-1.0, 0.0, 0.5, 1.0, 2.0};
    SpectrumCurve s = emission_spectrum(Detuning{0.0}, grid);
    REQUIRE(s.density[0] == 0.0); // nothing below the edge
    REQUIRE(s.density[1] == 0.0); // nothing at the edge itself
    REQUIRE(s.density[3] == Catch::Approx(0.5).epsilon(1e-12)); // sqrt(1)/(1+1)
    for (double d : s.density) REQUIRE(d >= 0.0);
    // detuned line: peak weight moves with the detuning
    SpectrumCurve s2 = emission_spectrum(Detuning{2.0}, std::vector<double>{0.5, 2.0});
    REQUIRE(s2.density[1] > s2.density[0]);
}

TEST_CASE("Mandel Q: affine population identity") {
    OscillatorSolution sol = solve_roots(Detuning{0.5});
    for (double q0 : {0.0, 2.0}) {
        for (double tau : {0.0, 0.7, 3.3, 12.0}) {
            double direct = excited_population(sol, tau) * (q0 - 1.0) + 1.0;
            REQUIRE(std::abs(mandel_q(sol, tau, q0) - direct) < 1e-12);
        }
    }
    REQUIRE(mandel_q(sol, 0.0, 0.0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE_THROWS_AS(mandel_q(sol, 1.0, -0.5), std::domain_error);
}
