#pragma once

#include <cmath>
#include <vector>

#include "madflow/fft.hpp"
#include "madflow/grid.hpp"

namespace madflow {

inline cplx inner_product(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
    return s * a.grid.cell_volume();
}

inline double norm(const ComplexField& f) { return std::sqrt(std::real(inner_product(f, f))); }

// same inner product evaluated from the DFT coefficients (Parseval route)
inline cplx inner_product_fourier(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "inner_product_fourier");
    const ComplexField fa = fourier_forward(a);
    const ComplexField fb = fourier_forward(b);
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < fa.values.size(); ++i)
        s += std::conj(fa.values[i]) * fb.values[i];
    return s * (a.grid.cell_volume() / static_cast<double>(a.grid.size()));
}

inline void normalize(ComplexField& f) {
    const double n = norm(f);
    if (!(n > 0.0)) throw DegenerateStateError("normalize: field has zero norm");
    const double s = 1.0 / n;
    for (auto& v : f.values) v *= s;
}

namespace detail {

// multiply DFT coefficients by i*k_d; the Nyquist bin is zeroed so first
// derivatives of real fields come back real to rounding
inline void apply_ik(ComplexField& fhat, int d) {
    const Grid& g = fhat.grid;
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            const int id = d == 0 ? i0 : i1;
            const int nd = g.points(d);
            double k = g.wavenumber(d, id);
            if (id == nd / 2) k = 0.0;
            fhat.values[g.index(i0, i1)] *= cplx{0.0, k};
        }
    }
}

inline void apply_minus_k2(ComplexField& fhat) {
    const Grid& g = fhat.grid;
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;
    for (int i0 = 0; i0 < n0; ++i0) {
        const double k0 = g.wavenumber(0, i0);
        for (int i1 = 0; i1 < n1; ++i1) {
            double k2 = k0 * k0;
            if (g.dims() == 2) {
                const double k1 = g.wavenumber(1, i1);
                k2 += k1 * k1;
            }
            fhat.values[g.index(i0, i1)] *= -k2;
        }
    }
}

inline ComplexField to_complex(const RealField& f) {
    ComplexField c(f.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) c.values[i] = cplx{f.values[i], 0.0};
    return c;
}

inline RealField real_part(const ComplexField& f) {
    RealField r(f.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) r.values[i] = std::real(f.values[i]);
    return r;
}

} // namespace detail

// spectral per-dimension derivative
inline std::vector<ComplexField> gradient(const ComplexField& f) {
    const ComplexField fhat = fourier_forward(f);
    std::vector<ComplexField> out;
    out.reserve(f.grid.dims());
    for (int d = 0; d < f.grid.dims(); ++d) {
        ComplexField gh = fhat;
        detail::apply_ik(gh, d);
        out.push_back(fourier_inverse(gh));
    }
    return out;
}

inline std::vector<RealField> gradient(const RealField& f) {
    const auto g = gradient(detail::to_complex(f));
    std::vector<RealField> out;
    out.reserve(g.size());
    for (const auto& c : g) out.push_back(detail::real_part(c));
    return out;
}

inline ComplexField laplacian(const ComplexField& f) {
    ComplexField fhat = fourier_forward(f);
    detail::apply_minus_k2(fhat);
    return fourier_inverse(fhat);
}

inline RealField laplacian(const RealField& f) {
    return detail::real_part(laplacian(detail::to_complex(f)));
}

inline RealField divergence(const std::vector<RealField>& v) {
    if (v.empty()) throw DimensionError("divergence: empty component list");
    RealField out(v[0].grid);
    for (int d = 0; d < static_cast<int>(v.size()); ++d) {
        require_same_grid(v[d].grid, out.grid, "divergence");
        ComplexField ch = fourier_forward(detail::to_complex(v[d]));
        detail::apply_ik(ch, d);
        const ComplexField dc = fourier_inverse(ch);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += std::real(dc.values[i]);
    }
    return out;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double std() const { return std::sqrt(variance); }
};

// per-dimension moments of a nonnegative density (weights rho * dV)
inline std::vector<Moments> density_moments(const RealField& rho) {
    const Grid& g = rho.grid;
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;
    double w = 0.0;
    std::array<double, 2> m1{0.0, 0.0}, m2{0.0, 0.0};
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            const double r = rho.values[g.index(i0, i1)];
            w += r;
            const double x0 = g.coord(0, i0);
            m1[0] += r * x0;
            m2[0] += r * x0 * x0;
            if (g.dims() == 2) {
                const double x1 = g.coord(1, i1);
                m1[1] += r * x1;
                m2[1] += r * x1 * x1;
            }
        }
    }
    if (!(w > 0.0)) throw DegenerateStateError("density_moments: density integrates to zero");
    std::vector<Moments> out(g.dims());
    for (int d = 0; d < g.dims(); ++d) {
        out[d].mean = m1[d] / w;
        out[d].variance = std::max(0.0, m2[d] / w - out[d].mean * out[d].mean);
    }
    return out;
}

// per-dimension momentum moments from the Fourier-space density |psi_hat(k)|^2
inline std::vector<Moments> momentum_moments(const ComplexField& psi, const Units& units) {
    const ComplexField fhat = fourier_forward(psi);
    const Grid& g = psi.grid;
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;
    double w = 0.0;
    std::array<double, 2> m1{0.0, 0.0}, m2{0.0, 0.0};
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            const double a = std::norm(fhat.values[g.index(i0, i1)]);
            w += a;
            const double p0 = units.hbar * g.wavenumber(0, i0);
            m1[0] += a * p0;
            m2[0] += a * p0 * p0;
            if (g.dims() == 2) {
                const double p1 = units.hbar * g.wavenumber(1, i1);
                m1[1] += a * p1;
                m2[1] += a * p1 * p1;
            }
        }
    }
    if (!(w > 0.0)) throw DegenerateStateError("momentum_moments: state has zero norm");
    std::vector<Moments> out(g.dims());
    for (int d = 0; d < g.dims(); ++d) {
        out[d].mean = m1[d] / w;
        out[d].variance = std::max(0.0, m2[d] / w - out[d].mean * out[d].mean);
    }
    return out;
}

inline RealField probability_density(const ComplexField& psi) {
    RealField rho(psi.grid);
    for (std::size_t i = 0; i < psi.values.size(); ++i) rho.values[i] = std::norm(psi.values[i]);
    return rho;
}

// <psi| p^2/2m + V |psi> for a normalized state
inline double energy_expectation(const ComplexField& psi, const RealField& potential,
                                 const Units& units) {
    require_same_grid(psi.grid, potential.grid, "energy_expectation");
    const Grid& g = psi.grid;
    const ComplexField fhat = fourier_forward(psi);
    const int n0 = g.points(0);
    const int n1 = g.dims() == 2 ? g.points(1) : 1;
    double kinetic = 0.0;
    for (int i0 = 0; i0 < n0; ++i0) {
        const double k0 = g.wavenumber(0, i0);
        for (int i1 = 0; i1 < n1; ++i1) {
            double k2 = k0 * k0;
            if (g.dims() == 2) {
                const double k1 = g.wavenumber(1, i1);
                k2 += k1 * k1;
            }
            kinetic += k2 * std::norm(fhat.values[g.index(i0, i1)]);
        }
    }
    kinetic *= units.hbar * units.hbar / (2.0 * units.mass) * g.cell_volume() /
               static_cast<double>(g.size());
    double pot = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        pot += potential.values[i] * std::norm(psi.values[i]);
    pot *= g.cell_volume();
    return kinetic + pot;
}

} // namespace madflow
