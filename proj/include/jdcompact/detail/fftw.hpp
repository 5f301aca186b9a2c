#pragma once

// Minimal RAII layer over FFTW's real-to-complex transforms.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>

namespace jdcompact::detail {

// The FFTW planner is not thread-safe; execution with new-array functions is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

inline FftwBuffer<double> alloc_real(std::size_t n) {
    auto* p = fftw_alloc_real(n);
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer<double>(p);
}

inline FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
    auto* p = fftw_alloc_complex(n);
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer<fftw_complex>(p);
}

/// Forward r2c and backward c2r plans of one length. FFTW_ESTIMATE keeps results
/// deterministic from run to run.
class RealFftPlans {
public:
    explicit RealFftPlans(std::size_t n) : n_(n) {
        auto in = alloc_real(n);
        auto out = alloc_complex(n / 2 + 1);
        std::lock_guard lock(fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out.get(), in.get(), FFTW_ESTIMATE);
        if (forward_ == nullptr || backward_ == nullptr) throw std::bad_alloc();
    }

    RealFftPlans(const RealFftPlans&) = delete;
    RealFftPlans& operator=(const RealFftPlans&) = delete;

    ~RealFftPlans() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    std::size_t size() const { return n_; }
    std::size_t spectrum_size() const { return n_ / 2 + 1; }

    // Buffers must come from alloc_real / alloc_complex. Backward is unnormalized
    // and destroys its input.
    void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
    void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(backward_, in, out); }

private:
    std::size_t n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace jdcompact::detail
