#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/decomp/emd.hpp"
#include "pvfc/decomp/fft.hpp"
#include "pvfc/decomp/result.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

namespace pvfc::decomp {

struct VmdParams {
    std::size_t modes = 3;          // K
    double alpha = 2000.0;          // bandwidth penalty
    double tau = 0.0;               // dual ascent step
    double tol = 1e-7;
    std::size_t max_iterations = 500;

    void validate() const {
        require(modes >= 1, ErrorCode::InvalidArgument, "VMD needs at least one mode");
        require(alpha > 0.0, ErrorCode::InvalidArgument, "VMD alpha must be positive");
        require(tau >= 0.0, ErrorCode::InvalidArgument, "VMD tau must be non-negative");
        require(tol > 0.0 && max_iterations >= 1, ErrorCode::InvalidArgument, "VMD needs tol > 0 and iterations");
    }

    nlohmann::json to_json() const {
        return {{"K", modes}, {"alpha", alpha}, {"tau", tau}, {"tol", tol}, {"max_iterations", max_iterations}};
    }
};

/// Variational mode decomposition by ADMM on the one-sided spectrum of the
/// mirror-extended signal.
///
/// Modes update as û_k = (f̂ − Σ_{i≠k} û_i + λ̂/2) / (1 + 2α(ω − ω_k)²), using
/// already-updated modes for i < k; ω_k is the power-weighted mean frequency
/// over non-negative frequencies. Centre frequencies start evenly spaced on
/// (0, 0.25) cycles/sample. Modes are returned sorted by ω_k. When
/// `max_iterations` is hit the last iterate is returned with `converged`
/// cleared.
inline DecompositionResult vmd(std::span<const double> y, const VmdParams& params) {
    params.validate();
    const std::size_t n = y.size();
    const std::size_t K = params.modes;
    require(n >= 2 * K && n >= 2, ErrorCode::TooShort, "VMD needs at least 2·K samples");
    require(!any_missing(y), ErrorCode::InvalidArgument, "VMD input must not contain missing values");

    // mirror extension: [reverse(first half), y, reverse(second half)], length 2n
    const std::size_t left = n / 2;
    const std::size_t right = n - left;
    const std::size_t T = 2 * n;
    std::vector<Complex> mirrored(T);
    for (std::size_t i = 0; i < left; ++i) {
        mirrored[i] = y[left - 1 - i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        mirrored[left + i] = y[i];
    }
    for (std::size_t i = 0; i < right; ++i) {
        mirrored[left + n + i] = y[n - 1 - i];
    }

    Fft fft(T);
    const std::vector<Complex> spectrum = fft.forward(mirrored);
    // fftshift: index j ↔ frequency (j − T/2)/T
    const std::size_t half = T / 2;
    std::vector<double> freqs(T);
    std::vector<Complex> f_plus(T, 0.0);
    for (std::size_t j = 0; j < T; ++j) {
        freqs[j] = (static_cast<double>(j) - static_cast<double>(half)) / static_cast<double>(T);
        if (j >= half) {
            f_plus[j] = spectrum[(j + half) % T];
        }
    }

    std::vector<std::vector<Complex>> u(K, std::vector<Complex>(T, 0.0));
    std::vector<double> omega(K);
    for (std::size_t k = 0; k < K; ++k) {
        omega[k] = 0.25 * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    }
    std::vector<Complex> lambda(T, 0.0);
    std::vector<Complex> total(T, 0.0);

    bool converged = false;
    std::size_t iteration = 0;
    while (iteration < params.max_iterations && !converged) {
        ++iteration;
        double diff = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<Complex> next(T, 0.0);
            double num = 0.0;
            double den = 0.0;
            double change = 0.0;
            double old_norm = 0.0;
            for (std::size_t j = half; j < T; ++j) {
                const Complex others = total[j] - u[k][j];
                const double d = freqs[j] - omega[k];
                next[j] = (f_plus[j] - others + 0.5 * lambda[j]) / (1.0 + 2.0 * params.alpha * d * d);
                const double p = std::norm(next[j]);
                num += freqs[j] * p;
                den += p;
                change += std::norm(next[j] - u[k][j]);
                old_norm += std::norm(u[k][j]);
            }
            if (old_norm > 0.0) {
                diff += change / old_norm;
            } else if (change > 0.0) {
                diff += INFINITY;
            }
            for (std::size_t j = half; j < T; ++j) {
                total[j] += next[j] - u[k][j];
            }
            u[k] = std::move(next);
            if (den > 0.0) {
                omega[k] = num / den;
            }
        }
        if (params.tau > 0.0) {
            for (std::size_t j = half; j < T; ++j) {
                lambda[j] += params.tau * (f_plus[j] - total[j]);
            }
        }
        converged = diff < params.tol;
    }

    // rebuild two-sided spectra and return to the time domain
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return omega[a] < omega[b]; });

    DecompositionResult result;
    result.method = Method::VMD;
    result.source_length = n;
    result.converged = converged;
    result.iterations = iteration;
    result.params = params.to_json();
    for (std::size_t rank = 0; rank < K; ++rank) {
        const std::size_t k = order[rank];
        std::vector<Complex> shifted(T, 0.0);
        for (std::size_t j = half; j < T; ++j) {
            shifted[j] = u[k][j];
        }
        for (std::size_t j = half + 1; j < T; ++j) {
            shifted[T - j] = std::conj(u[k][j]);
        }
        shifted[half] = Complex(u[k][half].real(), 0.0);
        std::vector<Complex> unshifted(T);
        for (std::size_t i = 0; i < T; ++i) {
            unshifted[i] = shifted[(i + half) % T];
        }
        const auto time = fft.inverse(unshifted);
        std::vector<double> mode(n);
        for (std::size_t i = 0; i < n; ++i) {
            mode[i] = time[left + i].real();
        }
        result.components.push_back({"mode_" + std::to_string(rank + 1), std::move(mode), std::nullopt, omega[k]});
    }
    return result;
}

inline DecompositionResult vmd(const TimeSeries& series, const VmdParams& params) {
    return vmd(series.values(), params);
}

/// VMD followed by EEMD of the VMD residual (input − Σ modes). Components:
/// VMD modes, then EEMD IMFs, then the EEMD residue.
inline DecompositionResult vmd_then_eemd(std::span<const double> y, const VmdParams& vmd_params,
                                         const EemdParams& eemd_params) {
    DecompositionResult first = vmd(y, vmd_params);
    const auto modes_sum = first.recompose();
    std::vector<double> residual(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        residual[i] = y[i] - modes_sum[i];
    }
    DecompositionResult second = eemd(residual, eemd_params);

    DecompositionResult result;
    result.method = Method::VmdEemd;
    result.source_length = y.size();
    result.converged = first.converged;
    result.iterations = first.iterations + second.iterations;
    result.params = {{"vmd", first.params}, {"eemd", second.params}};
    result.components = std::move(first.components);
    for (auto& c : second.components) {
        c.name = c.name == "residue" ? "residue" : "eemd_" + c.name;
        result.components.push_back(std::move(c));
    }
    return result;
}

inline DecompositionResult vmd_then_eemd(const TimeSeries& series, const VmdParams& vmd_params,
                                         const EemdParams& eemd_params) {
    return vmd_then_eemd(series.values(), vmd_params, eemd_params);
}

} // namespace pvfc::decomp
