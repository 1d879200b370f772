#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "madflow/grid.hpp"

namespace madflow {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministic per-stream generator: stream i of seed s always produces the
/// same sequence, so ensemble members can run in any order or thread and the
/// results stay bit-identical. The uniform and normal draws are pinned here
/// rather than taken from std:: distributions, which are implementation-defined.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        detail::splitmix64(s);
        s ^= 0xD1B54A32D192ED03ULL * (stream + 1);
        engine_.seed(detail::splitmix64(s));
    }

    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; } // [0, 1)

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Draws `count` i.i.d. positions from the normalized density: inverse CDF
/// over cells (1D), row marginal plus per-row conditional inverse CDF (2D).
/// The density is treated as piecewise constant on the cell around each grid
/// point, so samples are continuous positions, not grid points.
inline std::vector<Vec2> sample_initial_positions(const RealField& rho, std::size_t count,
                                                  std::uint64_t seed) {
    const Grid& g = rho.grid;
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;

    std::vector<double> w(rho.values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = rho.values[i] > 0.0 ? rho.values[i] : 0.0;
        total += w[i];
    }
    if (!(total > 0.0))
        throw DegenerateStateError("sample_initial_positions: density is identically zero");

    // row marginal CDF (rows = dimension 0); in 1D this is the full CDF
    std::vector<double> row_cdf(n0 + 1, 0.0);
    for (int i = 0; i < n0; ++i) {
        double m = 0.0;
        for (int j = 0; j < n1; ++j) m += w[g.index(i, j)];
        row_cdf[i + 1] = row_cdf[i] + m;
    }

    SeededRng rng(seed, 0);
    std::vector<Vec2> out;
    out.reserve(count);
    std::vector<double> col_cdf(n1 + 1, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
        const double u0 = rng.uniform01() * row_cdf[n0];
        const auto it0 = std::upper_bound(row_cdf.begin(), row_cdf.end(), u0);
        int i = static_cast<int>(std::max<std::ptrdiff_t>(0, it0 - row_cdf.begin() - 1));
        i = std::min(i, n0 - 1);
        const double band = row_cdf[i + 1] - row_cdf[i];
        const double frac0 = band > 0.0 ? (u0 - row_cdf[i]) / band : 0.5;
        Vec2 x{g.coord(0, i) + (frac0 - 0.5) * g.spacing(0), 0.0};

        if (g.dims() == 2) {
            for (int j = 0; j < n1; ++j) col_cdf[j + 1] = col_cdf[j] + w[g.index(i, j)];
            const double u1 = rng.uniform01() * col_cdf[n1];
            const auto it1 = std::upper_bound(col_cdf.begin(), col_cdf.end(), u1);
            int j = static_cast<int>(std::max<std::ptrdiff_t>(0, it1 - col_cdf.begin() - 1));
            j = std::min(j, n1 - 1);
            const double cw = col_cdf[j + 1] - col_cdf[j];
            const double frac1 = cw > 0.0 ? (u1 - col_cdf[j]) / cw : 0.5;
            x[1] = g.coord(1, j) + (frac1 - 0.5) * g.spacing(1);
        }
        out.push_back(x);
    }
    return out;
}

} // namespace madflow
