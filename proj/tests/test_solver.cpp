#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "madflow/evolve.hpp"
#include "madflow/initial_state.hpp"
#include "madflow/operators.hpp"
#include "madflow/potential.hpp"

using namespace madflow;

namespace {

const Units kUnits{};

ComplexField gaussian_state(const Grid& g, double sigma, double k0) {
    InitialStateSpec spec;
    spec.kind = InitialStateKind::gaussian;
    spec.sigma = {sigma, sigma};
    spec.momentum = {k0, 0.0};
    return build_initial_state(spec, g, kUnits);
}

double l2_diff(const ComplexField& a, const ComplexField& b) {
    ComplexField d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return norm(d);
}

} // namespace

TEST_CASE("build_potential") {
    const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});

    SECTION("free is the zero field") {
        const Potential p = build_potential({}, g, kUnits);
        for (double v : p.field.values) CHECK(v == 0.0);
    }

    SECTION("harmonic value at x=2 with omega=1 is 2.0") {
        const Grid gh = Grid::make(1, {16.0, 0.0}, {256, 0}); // x=2 on the grid
        PotentialSpec spec;
        spec.kind = PotentialKind::harmonic;
        spec.omega = 1.0;
        const Potential p = build_potential(spec, gh, kUnits);
        const int i = 128 + static_cast<int>(std::lround(2.0 / gh.spacing(0)));
        REQUIRE(gh.coord(0, i) == Catch::Approx(2.0).margin(1e-14));
        CHECK(p.field.values[i] == Catch::Approx(2.0).margin(1e-12));
    }

    SECTION("hard barrier with two apertures") {
        const Grid g2 = Grid::make(2, {16.0, 16.0}, {64, 64});
        PotentialSpec spec;
        spec.kind = PotentialKind::hard_barrier;
        spec.thickness = 1.0;
        spec.height = 40.0;
        spec.apertures = {{-2.0, 1.0}, {2.0, 1.0}};
        const Potential p = build_potential(spec, g2, kUnits);
        for (int i = 0; i < g2.points(0); ++i) {
            const double x = g2.coord(0, i);
            for (int j = 0; j < g2.points(1); ++j) {
                const double y = g2.coord(1, j);
                const bool in_slab = std::abs(x) < 0.5;
                const bool in_aperture =
                    std::abs(y + 2.0) < 0.5 || std::abs(y - 2.0) < 0.5;
                const double expect = (in_slab && !in_aperture) ? 40.0 : 0.0;
                CHECK(p.field.values[g2.index(i, j)] == expect);
            }
        }
    }

    SECTION("invalid parameters are rejected") {
        PotentialSpec spec;
        spec.kind = PotentialKind::hard_barrier;
        spec.height = -1.0;
        CHECK_THROWS_AS(build_potential(spec, g, kUnits), ConfigError);
    }
}

TEST_CASE("build_initial_state") {
    const Grid g = Grid::make(1, {40.0, 0.0}, {1024, 0});

    SECTION("gaussian moments") {
        const ComplexField psi = gaussian_state(g, 1.0, 0.0);
        CHECK(std::abs(norm(psi) - 1.0) < 1e-12);
        const auto m = density_moments(probability_density(psi));
        CHECK(std::abs(m[0].mean) < 1e-8);
        CHECK(m[0].variance == Catch::Approx(1.0).margin(1e-8));
    }

    SECTION("plane wave has constant magnitude") {
        InitialStateSpec spec;
        spec.kind = InitialStateKind::plane_wave;
        spec.momentum = {2.0, 0.0};
        const ComplexField psi = build_initial_state(spec, g, kUnits);
        const double a0 = std::abs(psi.values[0]);
        for (const auto& v : psi.values) CHECK(std::abs(v) == Catch::Approx(a0).margin(1e-13));
    }

    SECTION("symmetric double slit density is reflection symmetric") {
        const Grid g2 = Grid::make(2, {16.0, 16.0}, {128, 128});
        InitialStateSpec spec;
        spec.kind = InitialStateKind::two_gaussian_slits;
        spec.separation = 4.0;
        spec.slit_sigma = 0.5;
        spec.momentum = {3.0, 0.0};
        const ComplexField psi = build_initial_state(spec, g2, kUnits);
        const int n1 = g2.points(1);
        double worst = 0.0;
        for (int i = 0; i < g2.points(0); ++i) {
            for (int j = 1; j < n1; ++j) {
                const double a = std::norm(psi.values[g2.index(i, j)]);
                const double b = std::norm(psi.values[g2.index(i, n1 - j)]);
                worst = std::max(worst, std::abs(a - b));
            }
        }
        CHECK(worst < 1e-12);
    }

    SECTION("invalid parameters are rejected") {
        InitialStateSpec spec;
        spec.kind = InitialStateKind::two_gaussian_slits;
        spec.slit_sigma = -0.1;
        CHECK_THROWS_AS(build_initial_state(spec, Grid::make(2, {16, 16}, {64, 64}), kUnits),
                        ConfigError);
    }
}

TEST_CASE("split_step") {
    SECTION("free plane wave picks up exactly the kinetic phase") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        InitialStateSpec spec;
        spec.kind = InitialStateKind::plane_wave;
        spec.momentum = {g.wavenumber(0, 11), 0.0};
        const ComplexField psi = build_initial_state(spec, g, kUnits);
        const double dt = 1e-2;
        const ComplexField out = split_step(psi, build_potential({}, g, kUnits).field, kUnits, dt);
        const double k0 = g.wavenumber(0, 11);
        const cplx phase = std::polar(1.0, -kUnits.hbar * k0 * k0 * dt / (2.0 * kUnits.mass));
        double worst = 0.0;
        for (std::size_t i = 0; i < psi.values.size(); ++i)
            worst = std::max(worst, std::abs(out.values[i] - phase * psi.values[i]));
        CHECK(worst < 1e-12);
    }

    SECTION("norm is preserved to rounding") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {512, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        const Potential V = build_potential(vs, g, kUnits);
        ComplexField psi = gaussian_state(g, 0.8, 1.5);
        const double n0 = norm(psi);
        SplitStepper stepper(g, V.field, kUnits, 1e-3);
        for (int s = 0; s < 100; ++s) {
            stepper.step(psi);
            CHECK(std::abs(norm(psi) - n0) < 1e-13);
        }
    }

    SECTION("harmonic ground state is stationary to O(dt^3) per step") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {512, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        vs.omega = 1.0;
        const Potential V = build_potential(vs, g, kUnits);
        InitialStateSpec is;
        is.kind = InitialStateKind::harmonic_ground;
        is.omega = 1.0;
        const ComplexField psi0 = build_initial_state(is, g, kUnits);
        const ComplexField psi1 = split_step(psi0, V.field, kUnits, 1e-3);
        double worst = 0.0;
        for (std::size_t i = 0; i < psi0.values.size(); ++i)
            worst = std::max(worst, std::abs(std::abs(psi1.values[i]) -
                                             std::abs(psi0.values[i])));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("evolve") {
    SECTION("free gaussian spreading matches the closed form width") {
        const Grid g = Grid::make(1, {40.0, 0.0}, {1024, 0});
        const ComplexField psi0 = gaussian_state(g, 1.0, 0.0);
        const Timeline tl =
            evolve(psi0, build_potential({}, g, kUnits), kUnits, 2.0, 1e-3, 200);
        const auto m = density_moments(probability_density(tl.snapshots.back()));
        // sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2) = sqrt(2) at t=2
        CHECK(m[0].std() == Catch::Approx(std::sqrt(2.0)).margin(1e-6));
    }

    SECTION("coherent state center traces cos(omega t)") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        vs.omega = 1.0;
        InitialStateSpec is;
        is.kind = InitialStateKind::harmonic_coherent;
        is.omega = 1.0;
        is.displacement = 1.0;
        const ComplexField psi0 = build_initial_state(is, g, kUnits);
        const double period = 2.0 * std::numbers::pi;
        const double dt = period / 6300.0;
        const Timeline tl =
            evolve(psi0, build_potential(vs, g, kUnits), kUnits, period, dt, 450);
        for (std::size_t i = 0; i < tl.count(); ++i) {
            const auto m = density_moments(probability_density(tl.snapshots[i]));
            CHECK(m[0].mean == Catch::Approx(std::cos(tl.time(i))).margin(1e-4));
        }
    }

    SECTION("zero total time gives a single snapshot equal to psi0") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        const ComplexField psi0 = gaussian_state(g, 1.0, 0.0);
        const Timeline tl = evolve(psi0, build_potential({}, g, kUnits), kUnits, 0.0, 1e-3, 10);
        REQUIRE(tl.count() == 1);
        CHECK(l2_diff(tl.snapshots[0], psi0) == 0.0);
    }

    SECTION("snapshot times are exact stride multiples and norms stay put") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        const ComplexField psi0 = gaussian_state(g, 1.0, 1.0);
        const Timeline tl = evolve(psi0, build_potential({}, g, kUnits), kUnits, 0.5, 1e-3, 50);
        REQUIRE(tl.count() == 11);
        for (std::size_t i = 0; i < tl.count(); ++i) {
            CHECK(tl.steps[i] == static_cast<long>(i) * 50);
            CHECK(std::abs(norm(tl.snapshots[i]) - 1.0) < 1e-10);
        }
    }

    SECTION("advisory warning when dt is too large") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        const ComplexField psi0 = gaussian_state(g, 1.0, 0.0);
        const Timeline tl = evolve(psi0, build_potential({}, g, kUnits), kUnits, 0.1, 0.01, 10);
        REQUIRE_FALSE(tl.warnings.empty());
        CHECK(tl.warnings[0].find("advisory") != std::string::npos);
    }

    SECTION("misaligned total_time is rejected") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        const ComplexField psi0 = gaussian_state(g, 1.0, 0.0);
        CHECK_THROWS_AS(evolve(psi0, build_potential({}, g, kUnits), kUnits, 0.1005, 1e-2, 1),
                        ConfigError);
    }
}

TEST_CASE("solver invariants") {
    SECTION("norm drift below 1e-10 over 1e4 steps") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        const Potential V = build_potential(vs, g, kUnits);
        ComplexField psi = gaussian_state(g, 0.7, 2.0);
        SplitStepper stepper(g, V.field, kUnits, 1e-3);
        for (int s = 0; s < 10000; ++s) stepper.step(psi);
        CHECK(std::abs(norm(psi) - 1.0) < 1e-10);
    }

    SECTION("second-order convergence on the coherent state") {
        const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        InitialStateSpec is;
        is.kind = InitialStateKind::harmonic_coherent;
        is.displacement = 1.0;
        const ComplexField psi0 = build_initial_state(is, g, kUnits);
        const Potential V = build_potential(vs, g, kUnits);
        const double T = 1.0;
        auto final_state = [&](double dt) {
            const long steps = std::lround(T / dt);
            const Timeline tl = evolve(psi0, V, kUnits, T, dt, steps);
            return tl.snapshots.back();
        };
        const ComplexField ref = final_state(2.5e-4); // dt/8 reference
        const double e1 = l2_diff(final_state(2e-3), ref);
        const double e2 = l2_diff(final_state(1e-3), ref);
        const double ratio = e1 / e2;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }

    SECTION("energy is conserved for time-independent potentials") {
        const Grid g = Grid::make(1, {24.0, 0.0}, {512, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        const Potential V = build_potential(vs, g, kUnits);
        const ComplexField psi0 = gaussian_state(g, 1.0, 1.0);
        const Timeline tl = evolve(psi0, V, kUnits, 2.0, 2e-4, 1000);
        const double e0 = energy_expectation(tl.snapshots[0], V.field, kUnits);
        for (std::size_t i = 1; i < tl.count(); ++i) {
            const double e = energy_expectation(tl.snapshots[i], V.field, kUnits);
            CHECK(std::abs(e - e0) / std::abs(e0) < 1e-8);
        }
    }

    SECTION("time reversal returns to the initial state") {
        const Grid g = Grid::make(1, {24.0, 0.0}, {512, 0});
        PotentialSpec vs;
        vs.kind = PotentialKind::harmonic;
        const Potential V = build_potential(vs, g, kUnits);
        const ComplexField psi0 = gaussian_state(g, 0.8, 1.0);
        Timeline fwd = evolve(psi0, V, kUnits, 1.0, 1e-3, 1000);
        ComplexField back = fwd.snapshots.back();
        for (auto& v : back.values) v = std::conj(v);
        const Timeline rev = evolve(back, V, kUnits, 1.0, 1e-3, 1000);
        ComplexField result = rev.snapshots.back();
        for (auto& v : result.values) v = std::conj(v);
        CHECK(l2_diff(result, psi0) < 1e-8);
    }
}

TEST_CASE("stationary_timeline carries the exact phase") {
    const Grid g = Grid::make(1, {20.0, 0.0}, {256, 0});
    PotentialSpec vs;
    vs.kind = PotentialKind::harmonic;
    InitialStateSpec is;
    is.kind = InitialStateKind::harmonic_ground;
    const ComplexField psi0 = build_initial_state(is, g, kUnits);
    const double e0 = 0.5; // hbar omega / 2
    const Timeline tl =
        stationary_timeline(psi0, e0, build_potential(vs, g, kUnits), kUnits, 1.0, 1e-2, 10);
    REQUIRE(tl.count() == 11);
    const cplx expect = std::polar(1.0, -e0 * tl.time(5));
    CHECK(std::abs(tl.snapshots[5].values[128] - expect * psi0.values[128]) < 1e-14);
}
