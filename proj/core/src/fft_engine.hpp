#pragma once

#include <cstddef>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace rwpm::detail {

// FFTW plan creation/destruction is not thread-safe; execution on a plan's
// own buffers is. Every engine guards plan calls with this mutex and owns its
// buffers, so one engine per worker runs concurrently.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// Reusable real <-> half-complex transform pair of fixed size. Plans use
// FFTW_ESTIMATE only: deterministic results regardless of wisdom state.
class FftEngine {
public:
    explicit FftEngine(std::size_t m) : m_(m) {
        re_ = fftw_alloc_real(m_);
        co_ = fftw_alloc_complex(m_ / 2 + 1);
        if (!re_ || !co_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(m_), re_, co_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(m_), co_, re_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("FftEngine: plan creation failed");
    }
    ~FftEngine() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(re_);
        fftw_free(co_);
    }
    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

    std::size_t size() const { return m_; }
    double* real_buf() { return re_; }
    fftw_complex* spec_buf() { return co_; }
    std::size_t spec_size() const { return m_ / 2 + 1; }

    void forward() { fftw_execute(fwd_); }
    // Unnormalized inverse: caller divides by size().
    void backward() { fftw_execute(bwd_); }

private:
    std::size_t m_;
    double* re_;
    fftw_complex* co_;
    fftw_plan fwd_, bwd_;
};

}  // namespace rwpm::detail
