#pragma once

#include "pvfc/core/error.hpp"

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace pvfc::decomp {

using Complex = std::complex<double>;

/// Complex DFT of one fixed length backed by FFTW. Plans are built under a
/// process-wide lock since FFTW's planner is not re-entrant. An instance owns
/// its work buffers, so one instance must not be shared between threads.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        require(n > 0, ErrorCode::InvalidArgument, "FFT length must be positive");
        in_ = fftw_alloc_complex(n);
        out_ = fftw_alloc_complex(n);
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int len = static_cast<int>(n);
        forward_ = fftw_plan_dft_1d(len, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(len, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    ~Fft() {
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }

    std::size_t size() const noexcept { return n_; }

    std::vector<Complex> forward(const std::vector<Complex>& in) { return run(forward_, in, 1.0); }

    /// Inverse transform including the 1/n normalization.
    std::vector<Complex> inverse(const std::vector<Complex>& in) {
        return run(backward_, in, 1.0 / static_cast<double>(n_));
    }

private:
    std::vector<Complex> run(fftw_plan plan, const std::vector<Complex>& in, double scale) {
        require(in.size() == n_, ErrorCode::ShapeMismatch, "FFT input length mismatch");
        for (std::size_t i = 0; i < n_; ++i) {
            in_[i][0] = in[i].real();
            in_[i][1] = in[i].imag();
        }
        fftw_execute(plan);
        std::vector<Complex> out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            out[i] = Complex(out_[i][0] * scale, out_[i][1] * scale);
        }
        return out;
    }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    std::size_t n_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

} // namespace pvfc::decomp
