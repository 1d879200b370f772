#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "madflow/grid.hpp"
#include "madflow/madelung.hpp"

namespace madflow {

struct NodeRecord {
    Vec2 position{0.0, 0.0};
    int winding = 0;
    double raw_phase_sum = 0.0; // loop phase sum / 2pi before rounding
};

struct NodeSet {
    std::vector<NodeRecord> nodes;
    int total_winding() const {
        int s = 0;
        for (const auto& n : nodes) s += n.winding;
        return s;
    }
};

namespace detail {

// both components change sign across the cell (zeros on corners count)
inline bool sign_change(double a, double b, double c, double d) {
    const double lo = std::min(std::min(a, b), std::min(c, d));
    const double hi = std::max(std::max(a, b), std::max(c, d));
    return lo <= 0.0 && hi >= 0.0 && (lo < 0.0 || hi > 0.0);
}

// Newton refinement of the joint zero of the bilinear interpolants of
// Re psi and Im psi inside cell (i,j); returns fractional offsets in [0,1]^2
// or the cell center when the iteration leaves the cell.
inline Vec2 bilinear_zero(const ComplexField& psi, int i, int j) {
    const Grid& g = psi.grid;
    const cplx f00 = psi.values[g.index(i, j)];
    const cplx f10 = psi.values[g.index(i + 1, j)];
    const cplx f01 = psi.values[g.index(i, j + 1)];
    const cplx f11 = psi.values[g.index(i + 1, j + 1)];
    double u = 0.5, v = 0.5;
    for (int it = 0; it < 25; ++it) {
        const cplx f = f00 * (1 - u) * (1 - v) + f10 * u * (1 - v) + f01 * (1 - u) * v +
                       f11 * u * v;
        const cplx fu = (f10 - f00) * (1 - v) + (f11 - f01) * v;
        const cplx fv = (f01 - f00) * (1 - u) + (f11 - f10) * u;
        const double det = std::real(fu) * std::imag(fv) - std::imag(fu) * std::real(fv);
        if (det == 0.0) break;
        const double du = (std::real(f) * std::imag(fv) - std::imag(f) * std::real(fv)) / det;
        const double dv = (std::imag(f) * std::real(fu) - std::real(f) * std::imag(fu)) / det;
        u -= du;
        v -= dv;
        if (std::abs(du) < 1e-14 && std::abs(dv) < 1e-14) break;
    }
    if (!(u >= -0.25 && u <= 1.25 && v >= -0.25 && v <= 1.25)) return {0.5, 0.5};
    return {std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

// principal-value phase sum along the rectangle [ilo,ihi] x [jlo,jhi]
inline double ring_phase_sum(const ComplexField& psi, int ilo, int jlo, int ihi, int jhi) {
    const Grid& g = psi.grid;
    std::vector<std::size_t> path;
    for (int i = ilo; i < ihi; ++i) path.push_back(g.index(i, jlo));
    for (int j = jlo; j < jhi; ++j) path.push_back(g.index(ihi, j));
    for (int i = ihi; i > ilo; --i) path.push_back(g.index(i, jhi));
    for (int j = jhi; j > jlo; --j) path.push_back(g.index(ilo, j));
    double sum = 0.0;
    for (std::size_t m = 0; m < path.size(); ++m) {
        const cplx a = psi.values[path[m]];
        const cplx b = psi.values[path[(m + 1) % path.size()]];
        sum += std::arg(b / a);
    }
    return sum;
}

} // namespace detail

/// Locates isolated zeros of a 2D wavefunction: cells where Re and Im both
/// change sign are clustered (8-connected), each cluster gets a sub-grid
/// position from bilinear refinement and a winding from the principal-value
/// phase sum around a ring one cell outside the cluster. Windings are
/// integer-exact for zeros resolved by at least two grid cells.
inline NodeSet find_nodes(const ComplexField& psi, double rho_floor_rel = kDefaultRhoFloor) {
    const Grid& g = psi.grid;
    if (g.dims() != 2) throw DimensionError("find_nodes: requires a 2-dimensional grid");
    const RealField rho = probability_density(psi);
    const auto mask = detail::node_mask_for(rho, rho_floor_rel);

    const int n0 = g.points(0);
    const int n1 = g.points(1);
    std::vector<std::uint8_t> candidate(static_cast<std::size_t>(n0) * n1, 0);
    auto cell_id = [n1](int i, int j) { return static_cast<std::size_t>(i) * n1 + j; };

    for (int i = 0; i + 1 < n0; ++i) {
        for (int j = 0; j + 1 < n1; ++j) {
            const std::size_t c00 = g.index(i, j), c10 = g.index(i + 1, j);
            const std::size_t c01 = g.index(i, j + 1), c11 = g.index(i + 1, j + 1);
            if (mask[c00] && mask[c10] && mask[c01] && mask[c11]) continue; // dead zone
            const cplx f00 = psi.values[c00], f10 = psi.values[c10];
            const cplx f01 = psi.values[c01], f11 = psi.values[c11];
            if (detail::sign_change(f00.real(), f10.real(), f01.real(), f11.real()) &&
                detail::sign_change(f00.imag(), f10.imag(), f01.imag(), f11.imag()))
                candidate[cell_id(i, j)] = 1;
        }
    }

    NodeSet out;
    std::vector<std::uint8_t> seen(candidate.size(), 0);
    for (int i0 = 0; i0 + 1 < n0; ++i0) {
        for (int j0 = 0; j0 + 1 < n1; ++j0) {
            if (!candidate[cell_id(i0, j0)] || seen[cell_id(i0, j0)]) continue;
            // flood-fill the 8-connected cluster of candidate cells
            std::vector<std::pair<int, int>> cluster;
            std::vector<std::pair<int, int>> stack{{i0, j0}};
            seen[cell_id(i0, j0)] = 1;
            while (!stack.empty()) {
                auto [ci, cj] = stack.back();
                stack.pop_back();
                cluster.emplace_back(ci, cj);
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int ni = ci + di, nj = cj + dj;
                        if (ni < 0 || nj < 0 || ni + 1 >= n0 || nj + 1 >= n1) continue;
                        if (candidate[cell_id(ni, nj)] && !seen[cell_id(ni, nj)]) {
                            seen[cell_id(ni, nj)] = 1;
                            stack.emplace_back(ni, nj);
                        }
                    }
                }
            }

            int ilo = n0, ihi = 0, jlo = n1, jhi = 0;
            for (auto [ci, cj] : cluster) {
                ilo = std::min(ilo, ci);
                ihi = std::max(ihi, ci + 1);
                jlo = std::min(jlo, cj);
                jhi = std::max(jhi, cj + 1);
            }

            // refined position: average of per-cell bilinear zeros
            double px = 0.0, py = 0.0;
            for (auto [ci, cj] : cluster) {
                const Vec2 f = detail::bilinear_zero(psi, ci, cj);
                px += g.coord(0, ci) + f[0] * g.spacing(0);
                py += g.coord(1, cj) + f[1] * g.spacing(1);
            }
            px /= cluster.size();
            py /= cluster.size();

            const int ri = std::max(0, ilo - 1), rj = std::max(0, jlo - 1);
            const int Ri = std::min(n0 - 1, ihi + 1), Rj = std::min(n1 - 1, jhi + 1);
            const double raw =
                detail::ring_phase_sum(psi, ri, rj, Ri, Rj) / (2.0 * std::numbers::pi);
            NodeRecord rec;
            rec.position = {px, py};
            rec.raw_phase_sum = raw;
            rec.winding = static_cast<int>(std::lround(raw));
            out.nodes.push_back(rec);
        }
    }
    return out;
}

/// Rectangular loop on grid nodes, inclusive index corners.
struct GridLoop {
    int i0 = 0, j0 = 0, i1 = 0, j1 = 0;
};

namespace detail {

// integral of samples at uniform signed spacing h: composite Simpson where
// the interval count allows, trapezoid on the odd leading interval
inline double line_quadrature(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() >= 1 ? f.size() - 1 : 0;
    if (n == 0) return 0.0;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    std::size_t start = 0;
    double total = 0.0;
    if (n % 2 == 1) {
        total += 0.5 * h * (f[0] + f[1]);
        start = 1;
    }
    for (std::size_t m = start; m + 2 <= f.size() - 1; m += 2)
        total += h / 3.0 * (f[m] + 4.0 * f[m + 1] + f[m + 2]);
    return total;
}

} // namespace detail

/// Discrete line integral of v around the loop, counterclockwise in (x, y).
/// Throws InvalidLoopError when the path touches the node mask.
inline double circulation(const VelocityField& v, const GridLoop& loop) {
    if (v.components.size() != 2)
        throw DimensionError("circulation: requires a 2-dimensional velocity field");
    const Grid& g = v.components[0].grid;
    if (loop.i0 < 0 || loop.j0 < 0 || loop.i1 >= g.points(0) || loop.j1 >= g.points(1) ||
        loop.i0 >= loop.i1 || loop.j0 >= loop.j1)
        throw InvalidLoopError("circulation: loop corners are out of range or degenerate");

    auto masked = [&](int i, int j) { return v.node_mask[g.index(i, j)] != 0; };
    for (int i = loop.i0; i <= loop.i1; ++i)
        if (masked(i, loop.j0) || masked(i, loop.j1))
            throw InvalidLoopError("circulation: loop intersects the node mask");
    for (int j = loop.j0; j <= loop.j1; ++j)
        if (masked(loop.i0, j) || masked(loop.i1, j))
            throw InvalidLoopError("circulation: loop intersects the node mask");

    const double dx = g.spacing(0), dy = g.spacing(1);
    std::vector<double> f;
    double total = 0.0;

    // signed spacing carries the traversal direction
    auto side = [&](int fixed, int lo, int hi, bool along_dim0, double h) {
        f.clear();
        for (int m = lo; m <= hi; ++m) {
            const int i = along_dim0 ? m : fixed;
            const int j = along_dim0 ? fixed : m;
            f.push_back(v.components[along_dim0 ? 0 : 1].values[g.index(i, j)]);
        }
        total += detail::line_quadrature(f, h);
    };

    side(loop.j0, loop.i0, loop.i1, true, dx);   // bottom, +x
    side(loop.i1, loop.j0, loop.j1, false, dy);  // right, +y
    side(loop.j1, loop.i0, loop.i1, true, -dx);  // top, -x
    side(loop.i0, loop.j0, loop.j1, false, -dy); // left, -y
    return total;
}

struct CirculationReport {
    double value = 0.0;
    double winding_estimate = 0.0;  // value * m / (2 pi hbar)
    double winding_deviation = 0.0; // distance to the nearest integer
};

inline CirculationReport circulation_quantized(const VelocityField& v, const GridLoop& loop,
                                               const Units& units) {
    CirculationReport r;
    r.value = circulation(v, loop);
    r.winding_estimate = r.value * units.mass / (2.0 * std::numbers::pi * units.hbar);
    r.winding_deviation = std::abs(r.winding_estimate - std::lround(r.winding_estimate));
    return r;
}

} // namespace madflow
