#pragma once

#include <cmath>
#include <string>

#include "madflow/grid.hpp"
#include "madflow/operators.hpp"

namespace madflow {

enum class InitialStateKind {
    gaussian,
    plane_wave,
    two_gaussian_slits,
    harmonic_ground,
    harmonic_coherent,
    vortex,
};

struct InitialStateSpec {
    InitialStateKind kind = InitialStateKind::gaussian;
    std::array<double, 2> center{0.0, 0.0};
    std::array<double, 2> sigma{1.0, 1.0};      // gaussian: position std per dimension
    std::array<double, 2> momentum{0.0, 0.0};   // wavenumber k0 per dimension
    // two_gaussian_slits
    double separation = 4.0;   // slit center distance, transverse axis
    double slit_sigma = 0.5;   // isotropic width of each slit Gaussian
    double phase_rel = 0.0;    // relative phase of the second slit
    // harmonic states
    double omega = 1.0;
    double displacement = 0.0; // coherent-state offset along dimension 0
    // vortex
    double vortex_sigma = 1.0;
    int winding = 1;
};

// wavenumber snapped onto the grid so plane waves occupy a single DFT bin
inline double snap_wavenumber(const Grid& grid, int d, double k) {
    const double dk = 2.0 * std::numbers::pi / grid.extent(d);
    long f = std::lround(k / dk);
    const long n = grid.points(d);
    if (f >= n / 2) f = n / 2 - 1;
    if (f < -n / 2) f = -n / 2;
    return f * dk;
}

/// Builds the requested state and normalizes it explicitly, so downstream
/// code can rely on unit norm regardless of grid truncation.
inline ComplexField build_initial_state(const InitialStateSpec& spec, const Grid& grid,
                                        const Units& units) {
    ComplexField psi(grid);
    const int n0 = grid.points(0);
    const int n1 = grid.dims() == 2 ? grid.points(1) : 1;
    const cplx I{0.0, 1.0};

    switch (spec.kind) {
    case InitialStateKind::gaussian: {
        for (int d = 0; d < grid.dims(); ++d)
            if (!(spec.sigma[d] > 0.0))
                throw ConfigError("initial: gaussian sigma must be positive");
        for (int i0 = 0; i0 < n0; ++i0) {
            for (int i1 = 0; i1 < n1; ++i1) {
                double q = 0.0, phase = 0.0;
                for (int d = 0; d < grid.dims(); ++d) {
                    const double x = grid.coord(d, d == 0 ? i0 : i1) - spec.center[d];
                    q += x * x / (4.0 * spec.sigma[d] * spec.sigma[d]);
                    phase += spec.momentum[d] * x;
                }
                psi.values[grid.index(i0, i1)] = std::exp(-q) * std::exp(I * phase);
            }
        }
        break;
    }
    case InitialStateKind::plane_wave: {
        std::array<double, 2> k{0.0, 0.0};
        for (int d = 0; d < grid.dims(); ++d) k[d] = snap_wavenumber(grid, d, spec.momentum[d]);
        for (int i0 = 0; i0 < n0; ++i0) {
            for (int i1 = 0; i1 < n1; ++i1) {
                double phase = k[0] * grid.coord(0, i0);
                if (grid.dims() == 2) phase += k[1] * grid.coord(1, i1);
                psi.values[grid.index(i0, i1)] = std::exp(I * phase);
            }
        }
        break;
    }
    case InitialStateKind::two_gaussian_slits: {
        if (!(spec.slit_sigma > 0.0))
            throw ConfigError("initial: slit_sigma must be positive");
        if (!(spec.separation > 0.0))
            throw ConfigError("initial: separation must be positive");
        // slits sit on the transverse axis (dimension 1 in 2D, dimension 0 in 1D)
        const int tdim = grid.dims() == 2 ? 1 : 0;
        const double s2 = 4.0 * spec.slit_sigma * spec.slit_sigma;
        const cplx rel = std::exp(I * spec.phase_rel);
        for (int i0 = 0; i0 < n0; ++i0) {
            for (int i1 = 0; i1 < n1; ++i1) {
                std::array<double, 2> x{grid.coord(0, i0) - spec.center[0], 0.0};
                if (grid.dims() == 2) x[1] = grid.coord(1, i1) - spec.center[1];
                double q_common = 0.0;
                double phase = 0.0;
                for (int d = 0; d < grid.dims(); ++d) {
                    phase += spec.momentum[d] * x[d];
                    if (d != tdim) q_common += x[d] * x[d] / s2;
                }
                const double t = x[tdim];
                const double qa = (t - 0.5 * spec.separation) * (t - 0.5 * spec.separation) / s2;
                const double qb = (t + 0.5 * spec.separation) * (t + 0.5 * spec.separation) / s2;
                const cplx sum = std::exp(-qa) + rel * std::exp(-qb);
                psi.values[grid.index(i0, i1)] = std::exp(-q_common) * sum * std::exp(I * phase);
            }
        }
        break;
    }
    case InitialStateKind::harmonic_ground:
    case InitialStateKind::harmonic_coherent: {
        if (!(spec.omega > 0.0)) throw ConfigError("initial: omega must be positive");
        const double a = units.mass * spec.omega / (2.0 * units.hbar);
        const double x_c =
            spec.kind == InitialStateKind::harmonic_coherent ? spec.displacement : 0.0;
        for (int i0 = 0; i0 < n0; ++i0) {
            for (int i1 = 0; i1 < n1; ++i1) {
                double q = 0.0;
                for (int d = 0; d < grid.dims(); ++d) {
                    double x = grid.coord(d, d == 0 ? i0 : i1) - spec.center[d];
                    if (d == 0) x -= x_c;
                    q += a * x * x;
                }
                psi.values[grid.index(i0, i1)] = std::exp(-q);
            }
        }
        break;
    }
    case InitialStateKind::vortex: {
        if (grid.dims() != 2) throw ConfigError("initial: vortex requires a 2-dimensional grid");
        if (!(spec.vortex_sigma > 0.0))
            throw ConfigError("initial: vortex_sigma must be positive");
        if (spec.winding == 0) throw ConfigError("initial: vortex winding must be nonzero");
        const double s2 = 4.0 * spec.vortex_sigma * spec.vortex_sigma;
        for (int i0 = 0; i0 < n0; ++i0) {
            const double x = grid.coord(0, i0) - spec.center[0];
            for (int i1 = 0; i1 < n1; ++i1) {
                const double y = grid.coord(1, i1) - spec.center[1];
                const cplx z = spec.winding > 0 ? cplx{x, y} : cplx{x, -y};
                cplx zw{1.0, 0.0};
                for (int w = 0; w < std::abs(spec.winding); ++w) zw *= z;
                psi.values[grid.index(i0, i1)] = zw * std::exp(-(x * x + y * y) / s2);
            }
        }
        break;
    }
    }

    normalize(psi);
    return psi;
}

} // namespace madflow
