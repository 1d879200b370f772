#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "madflow/evolve.hpp"
#include "madflow/grid.hpp"
#include "madflow/operators.hpp"

namespace madflow {

inline constexpr double kDefaultRhoFloor = 1e-12;

/// Hydrodynamic view of a wavefunction: density rho = |psi|^2, amplitude
/// R = sqrt(rho), phase gradient grad_S = hbar Im(grad psi / psi), and the
/// quantum potential V_q = -(hbar^2/2m) lap(R)/R.
///
/// grad_S is evaluated pointwise from the logarithmic derivative, never by
/// global phase unwrapping: the phase itself is multivalued around nodes,
/// its gradient is not. Entries under the node mask are NaN, never zero.
struct MadelungFields {
    RealField rho;
    RealField amplitude;
    std::vector<RealField> grad_s;
    RealField v_q;
    std::vector<std::uint8_t> node_mask; // 1 = density below the floor
    double rho_floor_abs = 0.0;
};

struct VelocityField {
    std::vector<RealField> components; // v = grad_S / m = j / rho
    std::vector<std::uint8_t> node_mask;
    double time_stamp = 0.0;
    double cross_check_max = 0.0; // max |Im(grad psi/psi) - j/rho| * hbar/m off-mask
};

namespace detail {

inline std::vector<std::uint8_t> node_mask_for(const RealField& rho, double rho_floor_rel,
                                               double* floor_abs_out = nullptr) {
    double max_rho = 0.0;
    for (double r : rho.values) max_rho = std::max(max_rho, r);
    if (!(max_rho > 0.0)) throw DegenerateStateError("madelung: state is identically zero");
    const double floor_abs = rho_floor_rel * max_rho;
    if (floor_abs_out) *floor_abs_out = floor_abs;
    std::vector<std::uint8_t> mask(rho.values.size(), 0);
    for (std::size_t i = 0; i < rho.values.size(); ++i)
        if (rho.values[i] < floor_abs) mask[i] = 1;
    return mask;
}

} // namespace detail

/// V_q from the amplitude field, spectral Laplacian, NaN at masked points.
inline RealField quantum_potential(const RealField& amplitude,
                                   const std::vector<std::uint8_t>& mask, const Units& units) {
    const RealField lap = laplacian(amplitude);
    RealField vq(amplitude.grid);
    const double c = -units.hbar * units.hbar / (2.0 * units.mass);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < vq.values.size(); ++i)
        vq.values[i] = mask[i] ? nan : c * lap.values[i] / amplitude.values[i];
    return vq;
}

inline MadelungFields decompose(const ComplexField& psi, const Units& units,
                                double rho_floor_rel = kDefaultRhoFloor) {
    MadelungFields f;
    f.rho = probability_density(psi);
    f.node_mask = detail::node_mask_for(f.rho, rho_floor_rel, &f.rho_floor_abs);

    f.amplitude = RealField(psi.grid);
    for (std::size_t i = 0; i < f.rho.values.size(); ++i)
        f.amplitude.values[i] = std::sqrt(f.rho.values[i]);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto grad_psi = gradient(psi);
    f.grad_s.reserve(grad_psi.size());
    for (const auto& gp : grad_psi) {
        RealField gs(psi.grid);
        for (std::size_t i = 0; i < gs.values.size(); ++i)
            gs.values[i] = f.node_mask[i]
                               ? nan
                               : units.hbar * std::imag(gp.values[i] / psi.values[i]);
        f.grad_s.push_back(std::move(gs));
    }

    f.v_q = quantum_potential(f.amplitude, f.node_mask, units);
    return f;
}

inline RealField quantum_potential(const MadelungFields& fields, const Units& units) {
    return quantum_potential(fields.amplitude, fields.node_mask, units);
}

/// Guidance velocity v = (hbar/m) Im(grad psi / psi). The current-density
/// route j/rho with j = (hbar/m) Im(psi* grad psi) is evaluated alongside and
/// the worst off-mask disagreement is recorded in cross_check_max.
inline VelocityField velocity_field(const ComplexField& psi, const Units& units,
                                    double rho_floor_rel = kDefaultRhoFloor,
                                    double time_stamp = 0.0) {
    VelocityField vf;
    vf.time_stamp = time_stamp;
    const RealField rho = probability_density(psi);
    vf.node_mask = detail::node_mask_for(rho, rho_floor_rel);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double scale = units.hbar / units.mass;
    const auto grad_psi = gradient(psi);
    double worst = 0.0;
    for (const auto& gp : grad_psi) {
        RealField v(psi.grid);
        for (std::size_t i = 0; i < v.values.size(); ++i) {
            if (vf.node_mask[i]) {
                v.values[i] = nan;
                continue;
            }
            const double via_log = scale * std::imag(gp.values[i] / psi.values[i]);
            const double via_current =
                scale * std::imag(std::conj(psi.values[i]) * gp.values[i]) / rho.values[i];
            worst = std::max(worst, std::abs(via_log - via_current));
            v.values[i] = via_log;
        }
        vf.components.push_back(std::move(v));
    }
    vf.cross_check_max = worst;
    return vf;
}

struct ResidualReport {
    RealField field;
    double max_abs = 0.0;
    double l2 = 0.0;
};

namespace detail {

inline void residual_norms(ResidualReport& r, const std::vector<std::uint8_t>* mask) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < r.field.values.size(); ++i) {
        if (mask && (*mask)[i]) continue;
        const double v = r.field.values[i];
        m = std::max(m, std::abs(v));
        s += v * v;
    }
    r.max_abs = m;
    r.l2 = std::sqrt(s * r.field.grid.cell_volume());
}

inline void check_window(const Timeline& tl, std::size_t center) {
    if (tl.count() < 3 || center < 1 || center + 1 >= tl.count())
        throw InsufficientDataError(
            "residual: need three consecutive snapshots around the requested index");
}

} // namespace detail

/// d_t rho + div j at the middle snapshot; d_t rho by centered difference over
/// the snapshot spacing, div j spectral. Valid on the whole grid (j = rho v
/// stays regular at nodes).
inline ResidualReport continuity_residual(const Timeline& tl, std::size_t center) {
    detail::check_window(tl, center);
    const double delta = tl.snapshot_spacing();
    const ComplexField& prev = tl.snapshots[center - 1];
    const ComplexField& cur = tl.snapshots[center];
    const ComplexField& next = tl.snapshots[center + 1];

    const double scale = tl.units.hbar / tl.units.mass;
    const auto grad_psi = gradient(cur);
    std::vector<RealField> j;
    j.reserve(grad_psi.size());
    for (const auto& gp : grad_psi) {
        RealField c(cur.grid);
        for (std::size_t i = 0; i < c.values.size(); ++i)
            c.values[i] = scale * std::imag(std::conj(cur.values[i]) * gp.values[i]);
        j.push_back(std::move(c));
    }
    RealField div_j = divergence(j);

    ResidualReport r;
    r.field = RealField(cur.grid);
    for (std::size_t i = 0; i < r.field.values.size(); ++i) {
        const double drho =
            (std::norm(next.values[i]) - std::norm(prev.values[i])) / (2.0 * delta);
        r.field.values[i] = drho + div_j.values[i];
    }
    detail::residual_norms(r, nullptr);
    return r;
}

/// d_t S + |grad S|^2/2m + V + V_q at the middle snapshot, off the node mask.
/// d_t S = hbar Arg(psi(t+D)/psi(t-D)) / 2D on the principal branch; a phase
/// step at or beyond pi across one snapshot interval raises BranchWrapError.
inline ResidualReport hj_residual(const Timeline& tl, std::size_t center,
                                  double rho_floor_rel = kDefaultRhoFloor) {
    detail::check_window(tl, center);
    const double delta = tl.snapshot_spacing();
    const ComplexField& prev = tl.snapshots[center - 1];
    const ComplexField& cur = tl.snapshots[center];
    const ComplexField& next = tl.snapshots[center + 1];

    MadelungFields mf = decompose(cur, tl.units, rho_floor_rel);
    // require healthy density at all three times
    double floor_prev = 0.0, floor_next = 0.0;
    const auto mask_prev =
        detail::node_mask_for(probability_density(prev), rho_floor_rel, &floor_prev);
    const auto mask_next =
        detail::node_mask_for(probability_density(next), rho_floor_rel, &floor_next);
    std::vector<std::uint8_t> mask = mf.node_mask;
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = mask[i] || mask_prev[i] || mask_next[i];

    ResidualReport r;
    r.field = RealField(cur.grid);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < r.field.values.size(); ++i) {
        if (mask[i]) {
            r.field.values[i] = nan;
            continue;
        }
        const double step_fwd = std::arg(next.values[i] / cur.values[i]);
        const double step_bwd = std::arg(cur.values[i] / prev.values[i]);
        if (std::abs(step_fwd) + std::abs(step_bwd) >= pi)
            throw BranchWrapError(
                "hj_residual: phase step per snapshot reached the principal branch; "
                "reduce dt or the snapshot stride");
        const double dt_s =
            tl.units.hbar * std::arg(next.values[i] / prev.values[i]) / (2.0 * delta);
        double grad2 = 0.0;
        for (const auto& gs : mf.grad_s) grad2 += gs.values[i] * gs.values[i];
        r.field.values[i] = dt_s + grad2 / (2.0 * tl.units.mass) + tl.potential.values[i] +
                            mf.v_q.values[i];
    }
    detail::residual_norms(r, &mask);
    return r;
}

} // namespace madflow
