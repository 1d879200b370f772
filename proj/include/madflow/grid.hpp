#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "madflow/errors.hpp"

namespace madflow {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

// hbar and mass are carried explicitly so every formula keeps its symbols;
// the default is natural units.
struct Units {
    double hbar = 1.0;
    double mass = 1.0;
};

inline constexpr bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

/// Uniform periodic Cartesian grid in 1 or 2 dimensions, centered on the origin.
/// Point counts are powers of two (>= 8) so the spectral machinery stays radix-2
/// and the wavenumber grid covers [-pi/dx, pi/dx) in standard FFT ordering.
class Grid {
public:
    Grid() = default;

    static Grid make(int dims, std::array<double, 2> extents, std::array<int, 2> points) {
        if (dims != 1 && dims != 2)
            throw ConfigError("grid: dims must be 1 or 2, got " + std::to_string(dims));
        Grid g;
        g.dims_ = dims;
        for (int d = 0; d < dims; ++d) {
            if (!(extents[d] > 0.0))
                throw ConfigError("grid: extent must be positive in dimension " +
                                  std::to_string(d));
            if (points[d] < 8 || !is_power_of_two(points[d]))
                throw ConfigError("grid: points must be a power of two >= 8 in dimension " +
                                  std::to_string(d) + ", got " + std::to_string(points[d]));
            g.extents_[d] = extents[d];
            g.points_[d] = points[d];
        }
        return g;
    }

    int dims() const { return dims_; }
    int points(int d) const { return points_[d]; }
    double extent(int d) const { return extents_[d]; }
    double spacing(int d) const { return extents_[d] / points_[d]; }

    std::size_t size() const {
        std::size_t n = 1;
        for (int d = 0; d < dims_; ++d) n *= static_cast<std::size_t>(points_[d]);
        return n;
    }

    // cell volume (length in 1D, area in 2D)
    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < dims_; ++d) v *= spacing(d);
        return v;
    }

    double coord(int d, int i) const { return -0.5 * extents_[d] + i * spacing(d); }

    // wavenumber of FFT bin i in dimension d, standard ordering:
    // bins [0, N/2) are nonnegative, [N/2, N) map to negative frequencies.
    double wavenumber(int d, int i) const {
        const int n = points_[d];
        const int f = (i < n / 2) ? i : i - n;
        return 2.0 * std::numbers::pi * f / extents_[d];
    }

    double max_wavenumber(int d) const { return std::numbers::pi / spacing(d); }

    // row-major: dimension 0 is the slow index
    std::size_t index(int i0, int i1 = 0) const {
        return dims_ == 1 ? static_cast<std::size_t>(i0)
                          : static_cast<std::size_t>(i0) * points_[1] + i1;
    }

    bool operator==(const Grid&) const = default;

private:
    int dims_ = 1;
    std::array<int, 2> points_{8, 1};
    std::array<double, 2> extents_{1.0, 0.0};
};

struct RealField {
    Grid grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(const Grid& g) : grid(g), values(g.size(), 0.0) {}

    double& at(int i0, int i1 = 0) { return values[grid.index(i0, i1)]; }
    double at(int i0, int i1 = 0) const { return values[grid.index(i0, i1)]; }
};

struct ComplexField {
    Grid grid;
    std::vector<cplx> values;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}

    cplx& at(int i0, int i1 = 0) { return values[grid.index(i0, i1)]; }
    cplx at(int i0, int i1 = 0) const { return values[grid.index(i0, i1)]; }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw DimensionError(std::string(what) + ": fields live on different grids");
}

} // namespace madflow
