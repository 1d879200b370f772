#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "madflow/grid.hpp"

namespace madflow {

enum class PotentialKind { free_space, harmonic, hard_barrier };

struct Aperture {
    double center = 0.0;
    double width = 0.0;
};

struct PotentialSpec {
    PotentialKind kind = PotentialKind::free_space;
    // harmonic
    double omega = 1.0;
    std::array<double, 2> center{0.0, 0.0};
    // hard barrier: slab normal to dimension 0, apertures are strips in dimension 1
    double barrier_center = 0.0;
    double thickness = 0.5;
    double height = 1.0;
    std::vector<Aperture> apertures;
};

struct Potential {
    PotentialSpec spec;
    RealField field;
};

inline Potential build_potential(const PotentialSpec& spec, const Grid& grid,
                                 const Units& units) {
    Potential p{spec, RealField(grid)};
    const int n0 = grid.points(0);
    const int n1 = grid.dims() == 2 ? grid.points(1) : 1;
    switch (spec.kind) {
    case PotentialKind::free_space:
        break;
    case PotentialKind::harmonic: {
        const double c = 0.5 * units.mass * spec.omega * spec.omega;
        for (int i0 = 0; i0 < n0; ++i0) {
            const double dx0 = grid.coord(0, i0) - spec.center[0];
            for (int i1 = 0; i1 < n1; ++i1) {
                double r2 = dx0 * dx0;
                if (grid.dims() == 2) {
                    const double dx1 = grid.coord(1, i1) - spec.center[1];
                    r2 += dx1 * dx1;
                }
                p.field.values[grid.index(i0, i1)] = c * r2;
            }
        }
        break;
    }
    case PotentialKind::hard_barrier: {
        if (!(spec.height > 0.0))
            throw ConfigError("potential: hard_barrier height must be positive");
        if (!(spec.thickness > 0.0))
            throw ConfigError("potential: hard_barrier thickness must be positive");
        if (grid.dims() == 1 && !spec.apertures.empty())
            throw ConfigError("potential: apertures require a 2-dimensional grid");
        for (int i0 = 0; i0 < n0; ++i0) {
            const double x = grid.coord(0, i0);
            if (std::abs(x - spec.barrier_center) >= 0.5 * spec.thickness) continue;
            for (int i1 = 0; i1 < n1; ++i1) {
                bool open = false;
                if (grid.dims() == 2) {
                    const double y = grid.coord(1, i1);
                    for (const auto& a : spec.apertures) {
                        if (std::abs(y - a.center) < 0.5 * a.width) {
                            open = true;
                            break;
                        }
                    }
                }
                if (!open) p.field.values[grid.index(i0, i1)] = spec.height;
            }
        }
        break;
    }
    }
    return p;
}

} // namespace madflow
