#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pbg/bath.hpp"
#include "pbg/lowexc.hpp"
#include "pbg/meanfield.hpp"
#include "pbg/quantum.hpp"

using namespace pbg;

TEST_CASE("bath construction: mode counts, recurrence and validation") {
    DiscreteBath b = build_bath(IsotropicEffMass{}, Detuning{0.0}, 2000, 1e5);
    REQUIRE(b.n_modes() >= 2000);
    REQUIRE(b.recurrence_time > 0.0);
    for (double g : b.couplings) REQUIRE(g >= 0.0);
    REQUIRE_THROWS_AS(build_bath(IsotropicEffMass{}, Detuning{0.0}, 50, 1e5), std::domain_error);
}

TEST_CASE("damped transform of the discrete bath matches the kernel Laplace transform") {
    // sum_m g_m^2 / (s + i Delta_m) is the quantity the cell construction is
    // designed to get right; the residual ~ 2/(pi sqrt(W)) is window truncation
    for (double dc : {-1.0, 0.0, 1.0}) {
        DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{dc}, 2000, 1e5);
        for (cplx s : {cplx(1.0, 0.0), cplx(0.5, 2.0)}) {
            cplx acc = 0.0;
            for (int m = 0; m < bath.n_modes(); ++m)
                acc += bath.couplings[m] * bath.couplings[m] /
                       (s + cplx(0.0, bath.detunings[m]));
            REQUIRE(std::abs(acc - kernel_laplace(IsotropicEffMass{}, Detuning{dc}, s)) < 5e-3);
        }
    }
}

TEST_CASE("unitarity: excitation conservation in decay mode") {
    DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{0.0}, 800, 200.0);
    TimeGrid grid{2.0, 1e-4};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_decay, grid);
    for (int k = 0; k <= grid.steps(); ++k)
        REQUIRE(std::abs(run.series.states[k].j3 + run.bath_occupation[k] - 1.0) < 1e-6);
}

TEST_CASE("gain mode: growth identity |b|^2 - sum |c|^2 = 1") {
    DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{0.0}, 800, 200.0);
    TimeGrid grid{2.0, 1e-4};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_gain, grid);
    for (int k = 0; k <= grid.steps(); ++k)
        REQUIRE(std::abs(run.series.states[k].j3 - run.bath_occupation[k] - 1.0) < 1e-6);
    // and the atom grows
    REQUIRE(run.series.states.back().j3 > 1.5);
}

TEST_CASE("decay oracle reproduces the analytic low-excitation population") {
    DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{0.0}, 2000, 1e5);
    TimeGrid grid{10.0, 0.005};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_decay, grid);
    OscillatorSolution sol = solve_roots(Detuning{0.0});
    double md = 0.0;
    for (int k = 0; k <= grid.steps(); ++k)
        md = std::max(md, std::abs(run.series.states[k].j3 - excited_population(sol, grid.tau(k))));
    REQUIRE(md < 1e-2);
}

TEST_CASE("mode doubling leaves the dynamics invariant") {
    TimeGrid grid{10.0, 0.005};
    OracleRun r1 = oracle_evolve(build_bath(IsotropicEffMass{}, Detuning{0.0}, 1000, 1e5),
                                 OracleMode::lowexc_decay, grid);
    OracleRun r2 = oracle_evolve(build_bath(IsotropicEffMass{}, Detuning{0.0}, 2000, 1e5),
                                 OracleMode::lowexc_decay, grid);
    double md = 0.0;
    for (int k = 0; k <= grid.steps(); ++k)
        md = std::max(md, std::abs(r1.series.states[k].j3 - r2.series.states[k].j3));
    REQUIRE(md < 2.5e-3);
}

TEST_CASE("FreeSpace bath reproduces the Markovian exponential") {
    DiscreteBath bath = build_bath(FreeSpace{}, Detuning{0.0}, 2000, 200.0);
    REQUIRE(bath.recurrence_time == Catch::Approx(2.0 * pi / 0.1).epsilon(1e-9));
    TimeGrid grid{5.0, 1e-3};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_decay, grid);
    REQUIRE_FALSE(run.truncated_at_recurrence);
    double md = 0.0;
    for (int k = 0; k <= grid.steps(); ++k)
        md = std::max(md, std::abs(run.series.states[k].j3 - std::exp(-grid.tau(k))));
    REQUIRE(md < 2e-2);
}

TEST_CASE("zero coupling: the atom does not decay") {
    DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{0.0}, 400, 200.0);
    for (double& g : bath.couplings) g = 0.0;
    bath.counterterm = 0.0;
    TimeGrid grid{3.0, 0.01};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_decay, grid);
    for (int k = 0; k <= grid.steps(); ++k) {
        REQUIRE(std::abs(run.series.states[k].j3 - 1.0) < 1e-12);
        REQUIRE(run.bath_occupation[k] < 1e-24);
    }
}

TEST_CASE("recurrence metadata flags over-long grids") {
    DiscreteBath bath = build_bath(FreeSpace{}, Detuning{0.0}, 500, 100.0);
    double rec = bath.recurrence_time;
    OracleRun ok = oracle_evolve(bath, OracleMode::lowexc_decay, TimeGrid{0.5 * rec, 0.01});
    REQUIRE_FALSE(ok.truncated_at_recurrence);
    OracleRun bad = oracle_evolve(bath, OracleMode::lowexc_decay, TimeGrid{2.0 * rec, 0.05});
    REQUIRE(bad.truncated_at_recurrence);
    REQUIRE(bad.recurrence_time == rec);
}

TEST_CASE("meanfield oracle: gain-mode linear limit against the resolvent") {
    // the bath-side check of the growth amplitude: |b(tau)|^2 vs |D(tau)|^2
    DiscreteBath bath = build_bath(IsotropicEffMass{}, Detuning{0.0}, 2000, 1e5);
    TimeGrid grid{2.0, 0.002};
    OracleRun run = oracle_evolve(bath, OracleMode::lowexc_gain, grid);
    double md = 0.0;
    for (int k = 0; k <= grid.steps(); ++k)
        md = std::max(md, std::abs(run.series.states[k].j3 -
                                   std::norm(amplitude_D(IsotropicEffMass{}, Detuning{0.0},
                                                         grid.tau(k)))));
    REQUIRE(md < 1e-2);
}
