#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "madflow/evolve.hpp"
#include "madflow/madelung.hpp"
#include "madflow/sampling.hpp"

namespace madflow {

enum class TrajectoryKind { bohm, fluctuating };

inline const char* to_string(TrajectoryKind k) {
    return k == TrajectoryKind::bohm ? "bohm" : "fluctuating";
}

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::bohm;
    std::uint64_t seed = 0; // fluctuating only
    std::vector<double> times;
    std::vector<Vec2> positions;
    bool exited = false; // left the trusted domain; nothing recorded past that
};

struct TrajectoryOptions {
    int substeps = 4;
    bool osmotic_drift = true; // fluctuating kind only
    int edge_margin_cells = 4;
    double rho_floor_rel = kDefaultRhoFloor;
};

struct EnsembleOptions {
    TrajectoryKind kind = TrajectoryKind::bohm;
    std::size_t count = 0;
    std::uint64_t seed = 1;
    TrajectoryOptions trajectory;
    int threads = 0; // 0 = hardware concurrency
};

struct TrajectoryEnsemble {
    std::vector<Trajectory> members;
    std::vector<double> times; // shared snapshot time axis
    EnsembleOptions options;
    std::size_t exited_count() const {
        std::size_t n = 0;
        for (const auto& t : members) n += t.exited ? 1 : 0;
        return n;
    }
};

/// Per-snapshot guidance data derived lazily from a Timeline: velocity
/// components, node mask, and (optionally) the osmotic drift
/// u = (hbar/2m) grad(rho)/rho used by the fluctuating kind. Only a few
/// slices stay cached, so long timelines do not triple their memory.
/// slice() is not thread-safe; sample() on materialized slices is.
class GuidanceField {
public:
    GuidanceField(const Timeline& timeline, double rho_floor_rel, bool with_osmotic)
        : tl_(timeline), rho_floor_(rho_floor_rel), osmotic_(with_osmotic) {}

    struct Slice {
        std::vector<RealField> v;
        std::vector<RealField> u; // empty unless osmotic drift was requested
        std::vector<std::uint8_t> mask;
        double time = 0.0;
    };

    const Timeline& timeline() const { return tl_; }

    std::shared_ptr<const Slice> slice(std::size_t snap) {
        auto it = cache_.find(snap);
        if (it != cache_.end()) return it->second;
        auto s = std::make_shared<Slice>();
        const ComplexField& psi = tl_.snapshots[snap];
        VelocityField vf = velocity_field(psi, tl_.units, rho_floor_, tl_.time(snap));
        s->v = std::move(vf.components);
        s->mask = std::move(vf.node_mask);
        s->time = tl_.time(snap);
        if (osmotic_) {
            const RealField rho = probability_density(psi);
            const auto grad_rho = gradient(rho);
            const double c = tl_.units.hbar / (2.0 * tl_.units.mass);
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (const auto& gr : grad_rho) {
                RealField u(psi.grid);
                for (std::size_t i = 0; i < u.values.size(); ++i)
                    u.values[i] = s->mask[i] ? nan : c * gr.values[i] / rho.values[i];
                s->u.push_back(std::move(u));
            }
        }
        while (cache_.size() >= 4) {
            auto oldest = cache_.begin(); // smallest snapshot index
            if (oldest->first == snap) break;
            cache_.erase(oldest);
        }
        cache_.emplace(snap, s);
        return s;
    }

    struct Sample {
        Vec2 v{0.0, 0.0};
        Vec2 u{0.0, 0.0};
        bool ok = false;
    };

    // linear interpolation in space (per dimension) and in time between two
    // slices; not ok when the point is within the edge margin or the stencil
    // touches the node mask
    Sample sample(const Slice& a, const Slice& b, double theta, const Vec2& x,
                  int edge_margin_cells) const {
        Sample out;
        const Grid& g = tl_.grid;
        const int dims = g.dims();
        std::array<int, 2> base{0, 0};
        std::array<double, 2> frac{0.0, 0.0};
        for (int d = 0; d < dims; ++d) {
            const double dx = g.spacing(d);
            const double margin = edge_margin_cells * dx;
            if (!(x[d] >= -0.5 * g.extent(d) + margin && x[d] <= 0.5 * g.extent(d) - margin))
                return out;
            const double fi = (x[d] + 0.5 * g.extent(d)) / dx;
            base[d] = static_cast<int>(fi);
            base[d] = std::min(base[d], g.points(d) - 2);
            frac[d] = fi - base[d];
        }

        const int nsten = dims == 2 ? 4 : 2;
        std::array<std::size_t, 4> idx{};
        std::array<double, 4> wgt{};
        if (dims == 1) {
            idx = {g.index(base[0]), g.index(base[0] + 1), 0, 0};
            wgt = {1.0 - frac[0], frac[0], 0.0, 0.0};
        } else {
            idx = {g.index(base[0], base[1]), g.index(base[0] + 1, base[1]),
                   g.index(base[0], base[1] + 1), g.index(base[0] + 1, base[1] + 1)};
            wgt = {(1.0 - frac[0]) * (1.0 - frac[1]), frac[0] * (1.0 - frac[1]),
                   (1.0 - frac[0]) * frac[1], frac[0] * frac[1]};
        }
        for (int s = 0; s < nsten; ++s)
            if (a.mask[idx[s]] || b.mask[idx[s]]) return out;

        for (int d = 0; d < dims; ++d) {
            double va = 0.0, vb = 0.0;
            for (int s = 0; s < nsten; ++s) {
                va += wgt[s] * a.v[d].values[idx[s]];
                vb += wgt[s] * b.v[d].values[idx[s]];
            }
            out.v[d] = (1.0 - theta) * va + theta * vb;
            if (!a.u.empty()) {
                double ua = 0.0, ub = 0.0;
                for (int s = 0; s < nsten; ++s) {
                    ua += wgt[s] * a.u[d].values[idx[s]];
                    ub += wgt[s] * b.u[d].values[idx[s]];
                }
                out.u[d] = (1.0 - theta) * ua + theta * ub;
            }
        }
        out.ok = true;
        return out;
    }

    // velocity at a single snapshot time (no time interpolation)
    Sample sample_at(std::size_t snap, const Vec2& x, int edge_margin_cells) {
        const auto s = slice(snap);
        return sample(*s, *s, 0.0, x, edge_margin_cells);
    }

private:
    const Timeline& tl_;
    double rho_floor_;
    bool osmotic_;
    std::map<std::size_t, std::shared_ptr<Slice>> cache_;
};

/// Classic RK4 step through an arbitrary velocity callback; exposed so tests
/// can drive the integrator with analytic fields.
template <class VelFn>
inline Vec2 rk4_step(VelFn&& vel, const Vec2& x, double t, double h, int dims) {
    const Vec2 k1 = vel(x, t);
    Vec2 x2 = x, x3 = x, x4 = x;
    for (int d = 0; d < dims; ++d) x2[d] += 0.5 * h * k1[d];
    const Vec2 k2 = vel(x2, t + 0.5 * h);
    for (int d = 0; d < dims; ++d) x3[d] += 0.5 * h * k2[d];
    const Vec2 k3 = vel(x3, t + 0.5 * h);
    for (int d = 0; d < dims; ++d) x4[d] += h * k3[d];
    const Vec2 k4 = vel(x4, t + h);
    Vec2 out = x;
    for (int d = 0; d < dims; ++d)
        out[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    return out;
}

namespace detail {

struct MemberState {
    Vec2 x{0.0, 0.0};
    bool active = true;
    SeededRng rng{0, 0};
};

// advance one member across the interval between slices a and b;
// returns false when the member left the trusted domain
inline bool advance_member(const GuidanceField& gf, const GuidanceField::Slice& a,
                           const GuidanceField::Slice& b, MemberState& m,
                           TrajectoryKind kind, const TrajectoryOptions& opt,
                           const Units& units, int dims) {
    const double span = b.time - a.time;
    const double h = span / opt.substeps;
    for (int s = 0; s < opt.substeps; ++s) {
        const double t0 = s * h;
        if (kind == TrajectoryKind::bohm) {
            bool ok = true;
            auto vel = [&](const Vec2& x, double t) -> Vec2 {
                const auto smp = gf.sample(a, b, t / span, x, opt.edge_margin_cells);
                if (!smp.ok) ok = false;
                return smp.v;
            };
            const Vec2 next = rk4_step(vel, m.x, t0, h, dims);
            if (!ok) return false;
            m.x = next;
        } else {
            const auto smp = gf.sample(a, b, t0 / span, m.x, opt.edge_margin_cells);
            if (!smp.ok) return false;
            const double noise = std::sqrt(units.hbar * h / units.mass);
            for (int d = 0; d < dims; ++d) {
                double drift = smp.v[d];
                if (opt.osmotic_drift) drift += smp.u[d];
                m.x[d] += drift * h + noise * m.rng.normal();
            }
        }
    }
    // the recorded point itself must be trusted
    return gf.sample(b, b, 0.0, m.x, opt.edge_margin_cells).ok;
}

inline void check_start(const Timeline& tl, const Vec2& x0) {
    for (int d = 0; d < tl.grid.dims(); ++d)
        if (!(x0[d] >= -0.5 * tl.grid.extent(d) && x0[d] <= 0.5 * tl.grid.extent(d)))
            throw ConfigError("trajectory: start position lies outside the domain");
}

} // namespace detail

/// Streamline of the guidance velocity through the timeline: RK4 in time,
/// linear interpolation in space and between snapshots. Positions are
/// recorded on the snapshot time axis.
inline Trajectory integrate_bohm(const Timeline& tl, const Vec2& x0, int substeps = 4,
                                 const TrajectoryOptions& opt_in = {}) {
    detail::check_start(tl, x0);
    TrajectoryOptions opt = opt_in;
    opt.substeps = substeps;
    GuidanceField gf(tl, opt.rho_floor_rel, false);

    Trajectory tr;
    tr.kind = TrajectoryKind::bohm;
    detail::MemberState m;
    m.x = x0;
    if (!gf.sample_at(0, x0, opt.edge_margin_cells).ok) {
        tr.exited = true;
        return tr;
    }
    tr.times.push_back(tl.time(0));
    tr.positions.push_back(x0);
    for (std::size_t s = 0; s + 1 < tl.count(); ++s) {
        const auto a = gf.slice(s);
        const auto b = gf.slice(s + 1);
        if (!detail::advance_member(gf, *a, *b, m, TrajectoryKind::bohm, opt, tl.units,
                                    tl.grid.dims())) {
            tr.exited = true;
            break;
        }
        tr.times.push_back(tl.time(s + 1));
        tr.positions.push_back(m.x);
    }
    return tr;
}

/// Stochastic trajectory around the streamline flow: Euler-Maruyama with the
/// Bohm drift, optional osmotic drift, and per-step velocity noise of
/// variance hbar/(m dt) per dimension (diffusion coefficient hbar/2m).
inline Trajectory fluctuating_trajectory(const Timeline& tl, const Vec2& x0, std::uint64_t seed,
                                         int substeps = 4, const TrajectoryOptions& opt_in = {}) {
    detail::check_start(tl, x0);
    TrajectoryOptions opt = opt_in;
    opt.substeps = substeps;
    GuidanceField gf(tl, opt.rho_floor_rel, opt.osmotic_drift);

    Trajectory tr;
    tr.kind = TrajectoryKind::fluctuating;
    tr.seed = seed;
    detail::MemberState m;
    m.x = x0;
    m.rng = SeededRng(seed, 1);
    if (!gf.sample_at(0, x0, opt.edge_margin_cells).ok) {
        tr.exited = true;
        return tr;
    }
    tr.times.push_back(tl.time(0));
    tr.positions.push_back(x0);
    for (std::size_t s = 0; s + 1 < tl.count(); ++s) {
        const auto a = gf.slice(s);
        const auto b = gf.slice(s + 1);
        if (!detail::advance_member(gf, *a, *b, m, TrajectoryKind::fluctuating, opt, tl.units,
                                    tl.grid.dims())) {
            tr.exited = true;
            break;
        }
        tr.times.push_back(tl.time(s + 1));
        tr.positions.push_back(m.x);
    }
    return tr;
}

/// Born-distributed ensemble of `count` trajectories. Initial positions come
/// from the first snapshot's density; member i integrates with RNG stream
/// (seed, i+1), so serial and parallel runs agree bit for bit.
inline TrajectoryEnsemble run_ensemble(const Timeline& tl, const EnsembleOptions& options) {
    if (options.count == 0) throw ConfigError("ensemble: count must be >= 1");
    if (tl.count() < 1) throw InsufficientDataError("ensemble: timeline has no snapshots");

    TrajectoryEnsemble ens;
    ens.options = options;
    for (std::size_t s = 0; s < tl.count(); ++s) ens.times.push_back(tl.time(s));

    const RealField rho0 = probability_density(tl.snapshots[0]);
    const auto starts = sample_initial_positions(rho0, options.count, options.seed);

    const int dims = tl.grid.dims();
    const bool osmotic =
        options.kind == TrajectoryKind::fluctuating && options.trajectory.osmotic_drift;
    GuidanceField gf(tl, options.trajectory.rho_floor_rel, osmotic);

    std::vector<detail::MemberState> state(options.count);
    ens.members.resize(options.count);
    const auto slice0 = gf.slice(0);
    for (std::size_t i = 0; i < options.count; ++i) {
        state[i].x = starts[i];
        state[i].rng = SeededRng(options.seed, i + 1);
        Trajectory& tr = ens.members[i];
        tr.kind = options.kind;
        tr.seed = options.seed;
        if (!gf.sample(*slice0, *slice0, 0.0, starts[i], options.trajectory.edge_margin_cells)
                 .ok) {
            state[i].active = false;
            tr.exited = true;
            continue;
        }
        tr.times.push_back(tl.time(0));
        tr.positions.push_back(starts[i]);
    }

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned nthreads =
        options.threads > 0 ? static_cast<unsigned>(options.threads) : std::min(hw, 16u);

    for (std::size_t s = 0; s + 1 < tl.count(); ++s) {
        const auto a = gf.slice(s);     // materialize single-threaded
        const auto b = gf.slice(s + 1);
        auto work = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                if (!state[i].active) continue;
                if (!detail::advance_member(gf, *a, *b, state[i], options.kind,
                                            options.trajectory, tl.units, dims)) {
                    state[i].active = false;
                    ens.members[i].exited = true;
                }
            }
        };
        if (nthreads <= 1 || options.count < 64) {
            work(0, options.count);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (options.count + nthreads - 1) / nthreads;
            for (unsigned t = 0; t < nthreads; ++t) {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(options.count, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(work, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        for (std::size_t i = 0; i < options.count; ++i) {
            if (!state[i].active) continue;
            ens.members[i].times.push_back(tl.time(s + 1));
            ens.members[i].positions.push_back(state[i].x);
        }
    }
    return ens;
}

} // namespace madflow
