#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "madflow/fft.hpp"
#include "madflow/grid.hpp"
#include "madflow/operators.hpp"
#include "madflow/potential.hpp"

namespace madflow {

/// Discrete solution record: psi snapshots every `stride` solver steps.
/// Snapshot times are exact multiples of dt by construction (stored as step
/// indices), and the realized potential rides along for later analysis.
struct Timeline {
    Grid grid;
    Units units;
    double dt = 0.0;
    long stride = 1;
    RealField potential;
    std::vector<long> steps;             // solver step index of each snapshot
    std::vector<ComplexField> snapshots;
    std::vector<std::string> warnings;

    std::size_t count() const { return snapshots.size(); }
    double time(std::size_t i) const { return static_cast<double>(steps[i]) * dt; }
    double snapshot_spacing() const { return static_cast<double>(stride) * dt; }
};

// kinetic phase per step stays below pi at the grid Nyquist when dt is below
// this; the stepper stays unitary regardless but accuracy degrades past it
inline double stability_advisory_dt(const Grid& grid, const Units& units) {
    double dt = 1e300;
    for (int d = 0; d < grid.dims(); ++d) {
        const double dx = grid.spacing(d);
        dt = std::min(dt, 0.5 * units.mass * dx * dx / (std::numbers::pi * units.hbar));
    }
    return dt;
}

/// Second-order Strang step exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h) with
/// the phase tables precomputed once. Exactly norm-preserving on the grid.
class SplitStepper {
public:
    SplitStepper(const Grid& grid, const RealField& potential, const Units& units, double dt)
        : grid_(grid), dt_(dt) {
        require_same_grid(grid, potential.grid, "SplitStepper");
        if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
        half_potential_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double phase = -potential.values[i] * dt / (2.0 * units.hbar);
            half_potential_[i] = std::polar(1.0, phase);
        }
        kinetic_.resize(grid.size());
        const int n0 = grid.points(0);
        const int n1 = grid.dims() == 2 ? grid.points(1) : 1;
        for (int i0 = 0; i0 < n0; ++i0) {
            const double k0 = grid.wavenumber(0, i0);
            for (int i1 = 0; i1 < n1; ++i1) {
                double k2 = k0 * k0;
                if (grid.dims() == 2) {
                    const double k1 = grid.wavenumber(1, i1);
                    k2 += k1 * k1;
                }
                const double phase = -units.hbar * k2 * dt / (2.0 * units.mass);
                kinetic_[grid.index(i0, i1)] = std::polar(1.0, phase);
            }
        }
    }

    void step(ComplexField& psi) const {
        require_same_grid(psi.grid, grid_, "SplitStepper::step");
        auto& v = psi.values;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_[i];
        detail::plan_for(grid_).forward(v.data(), v.data());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kinetic_[i];
        detail::plan_for(grid_).inverse(v.data(), v.data());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_[i];
    }

    double dt() const { return dt_; }

private:
    Grid grid_;
    double dt_;
    std::vector<cplx> half_potential_;
    std::vector<cplx> kinetic_;
};

inline ComplexField split_step(const ComplexField& psi, const RealField& potential,
                               const Units& units, double dt) {
    SplitStepper stepper(psi.grid, potential, units, dt);
    ComplexField out = psi;
    stepper.step(out);
    return out;
}

inline Timeline evolve(const ComplexField& psi0, const Potential& potential, const Units& units,
                       double total_time, double dt, long snapshot_stride) {
    require_same_grid(psi0.grid, potential.field.grid, "evolve");
    if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
    if (snapshot_stride < 1) throw ConfigError("solver: snapshot_stride must be >= 1");
    if (total_time < 0.0) throw ConfigError("solver: total_time must be >= 0");

    const long steps = std::lround(total_time / dt);
    if (std::abs(steps * dt - total_time) > 1e-9 * std::max(1.0, total_time))
        throw ConfigError("solver: total_time must be an integer multiple of dt");
    if (steps % snapshot_stride != 0)
        throw ConfigError("solver: step count must be divisible by snapshot_stride");

    Timeline tl;
    tl.grid = psi0.grid;
    tl.units = units;
    tl.dt = dt;
    tl.stride = snapshot_stride;
    tl.potential = potential.field;

    const double dt_adv = stability_advisory_dt(psi0.grid, units);
    if (dt > dt_adv) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "solver: dt=%.6g exceeds the accuracy advisory %.6g "
                      "(kinetic phase per step above pi at the grid Nyquist)",
                      dt, dt_adv);
        tl.warnings.emplace_back(buf);
    }

    tl.steps.push_back(0);
    tl.snapshots.push_back(psi0);
    if (steps == 0) return tl;

    SplitStepper stepper(psi0.grid, potential.field, units, dt);
    ComplexField psi = psi0;
    for (long s = 1; s <= steps; ++s) {
        stepper.step(psi);
        if (s % snapshot_stride == 0) {
            tl.steps.push_back(s);
            tl.snapshots.push_back(psi);
        }
    }
    return tl;
}

/// Reference timeline for a stationary eigenstate: snapshots are the input
/// state carrying the exact phase e^{-iEt/hbar}. Useful as a machine-precision
/// oracle where solver time-stepping error would otherwise dominate.
inline Timeline stationary_timeline(const ComplexField& eigenstate, double energy,
                                    const Potential& potential, const Units& units,
                                    double total_time, double dt, long snapshot_stride) {
    require_same_grid(eigenstate.grid, potential.field.grid, "stationary_timeline");
    if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
    const long steps = std::lround(total_time / dt);
    if (steps % snapshot_stride != 0)
        throw ConfigError("solver: step count must be divisible by snapshot_stride");
    Timeline tl;
    tl.grid = eigenstate.grid;
    tl.units = units;
    tl.dt = dt;
    tl.stride = snapshot_stride;
    tl.potential = potential.field;
    for (long s = 0; s <= steps; s += snapshot_stride) {
        const double t = s * dt;
        const cplx phase = std::polar(1.0, -energy * t / units.hbar);
        ComplexField snap = eigenstate;
        for (auto& v : snap.values) v *= phase;
        tl.steps.push_back(s);
        tl.snapshots.push_back(std::move(snap));
    }
    return tl;
}

} // namespace madflow
