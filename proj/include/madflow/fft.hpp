#pragma once

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "madflow/grid.hpp"

namespace madflow {
namespace detail {

// One FFTW plan pair per grid shape. Transforms always run through an
// internal fftw_malloc'ed buffer so plan selection (and therefore rounding)
// never depends on the alignment of caller memory — identical inputs give
// identical outputs across runs and call sites.
class FftPlan {
public:
    explicit FftPlan(const Grid& g) : n_(g.size()) {
        buf_ = fftw_alloc_complex(n_);
        if (g.dims() == 1) {
            fwd_ = fftw_plan_dft_1d(g.points(0), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_1d(g.points(0), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_2d(g.points(0), g.points(1), buf_, buf_, FFTW_FORWARD,
                                    FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_2d(g.points(0), g.points(1), buf_, buf_, FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
        }
    }

    ~FftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    // unnormalized DFT
    void forward(const cplx* in, cplx* out) { run(fwd_, in, out, 1.0); }

    // inverse DFT, scaled by 1/N so inverse(forward(f)) == f
    void inverse(const cplx* in, cplx* out) { run(bwd_, in, out, 1.0 / static_cast<double>(n_)); }

private:
    void run(fftw_plan p, const cplx* in, cplx* out, double scale) {
        std::lock_guard<std::mutex> lock(mutex_);
        std::memcpy(buf_, in, n_ * sizeof(cplx));
        fftw_execute(p);
        const cplx* b = reinterpret_cast<const cplx*>(buf_);
        if (scale == 1.0) {
            std::memcpy(out, b, n_ * sizeof(cplx));
        } else {
            for (std::size_t i = 0; i < n_; ++i) out[i] = b[i] * scale;
        }
    }

    std::size_t n_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
    std::mutex mutex_;
};

inline FftPlan& plan_for(const Grid& g) {
    using Key = std::tuple<int, int, int>;
    static std::mutex registry_mutex;
    static std::map<Key, std::unique_ptr<FftPlan>> registry;
    const Key key{g.dims(), g.points(0), g.dims() == 2 ? g.points(1) : 1};
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto it = registry.find(key);
    if (it == registry.end()) it = registry.emplace(key, std::make_unique<FftPlan>(g)).first;
    return *it->second;
}

} // namespace detail

inline ComplexField fourier_forward(const ComplexField& f) {
    ComplexField out(f.grid);
    detail::plan_for(f.grid).forward(f.values.data(), out.values.data());
    return out;
}

inline ComplexField fourier_inverse(const ComplexField& f) {
    ComplexField out(f.grid);
    detail::plan_for(f.grid).inverse(f.values.data(), out.values.data());
    return out;
}

} // namespace madflow
