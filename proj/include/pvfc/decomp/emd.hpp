#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/decomp/result.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace pvfc::decomp {

/// Natural cubic spline through strictly increasing knots.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        require(n >= 2 && y_.size() == n, ErrorCode::InvalidArgument, "spline needs at least two knots");
        m_.assign(n, 0.0);
        if (n == 2) {
            return;
        }
        // tridiagonal system for second derivatives, m_0 = m_{n-1} = 0
        std::vector<double> diag(n - 2);
        std::vector<double> upper(n - 2);
        std::vector<double> rhs(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            require(h0 > 0.0 && h1 > 0.0, ErrorCode::InvalidArgument, "spline knots must increase");
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        // Thomas algorithm; sub-diagonal entry of row i is h_{i} = x_i − x_{i−1}
        for (std::size_t i = 1; i < diag.size(); ++i) {
            const double lower = x_[i + 1] - x_[i];
            const double f = lower / diag[i - 1];
            diag[i] -= f * upper[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        for (std::size_t i = diag.size(); i-- > 0;) {
            double v = rhs[i];
            if (i + 1 < diag.size()) {
                v -= upper[i] * m_[i + 2];
            }
            m_[i + 1] = v / diag[i];
        }
    }

    double operator()(double t) const {
        std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
        k = std::clamp<std::size_t>(k, 1, x_.size() - 1);
        const double x0 = x_[k - 1];
        const double x1 = x_[k];
        const double h = x1 - x0;
        const double a = (x1 - t) / h;
        const double b = (t - x0) / h;
        return a * y_[k - 1] + b * y_[k] +
               ((a * a * a - a) * m_[k - 1] + (b * b * b - b) * m_[k]) * h * h / 6.0;
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
};

/// Interior local extrema; a flat run counts once, at its middle.
inline Extrema find_extrema(std::span<const double> x) {
    Extrema e;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        std::size_t j = i;
        while (j + 1 < n && x[j + 1] == x[i]) {
            ++j;
        }
        if (j + 1 >= n) {
            break;
        }
        const double prev = x[i - 1];
        const double next = x[j + 1];
        if (x[i] > prev && x[i] > next) {
            e.maxima.push_back((i + j) / 2);
        } else if (x[i] < prev && x[i] < next) {
            e.minima.push_back((i + j) / 2);
        }
        i = j + 1;
    }
    return e;
}

inline std::size_t zero_crossings(std::span<const double> x) {
    std::size_t count = 0;
    double last = 0.0;
    for (double v : x) {
        if (v == 0.0) {
            continue;
        }
        if (last != 0.0 && (v > 0.0) != (last > 0.0)) {
            ++count;
        }
        last = v;
    }
    return count;
}

namespace detail {

/// Envelope through the given extrema, mirror-extended by two extrema at
/// each end. An endpoint beyond its neighbouring extremum becomes a knot.
inline std::vector<double> envelope(std::span<const double> x, const std::vector<std::size_t>& idx, bool upper) {
    const std::size_t n = x.size();
    const double last = static_cast<double>(n - 1);
    const std::size_t mirrored = std::min<std::size_t>(2, idx.size());
    auto beyond = [&](double endpoint, double extremum) { return upper ? endpoint > extremum : endpoint < extremum; };

    std::vector<double> kx;
    std::vector<double> ky;
    const bool left_knot = beyond(x[0], x[idx.front()]);
    const bool right_knot = beyond(x[n - 1], x[idx.back()]);
    for (std::size_t k = mirrored; k-- > 0;) {
        kx.push_back(-static_cast<double>(idx[k]));
        ky.push_back(x[idx[k]]);
    }
    if (left_knot) {
        kx.push_back(0.0);
        ky.push_back(x[0]);
    }
    for (std::size_t i : idx) {
        kx.push_back(static_cast<double>(i));
        ky.push_back(x[i]);
    }
    if (right_knot) {
        kx.push_back(last);
        ky.push_back(x[n - 1]);
    }
    for (std::size_t k = 0; k < mirrored; ++k) {
        const std::size_t i = idx[idx.size() - 1 - k];
        kx.push_back(2.0 * last - static_cast<double>(i));
        ky.push_back(x[i]);
    }
    NaturalCubicSpline spline(std::move(kx), std::move(ky));
    std::vector<double> env(n);
    for (std::size_t t = 0; t < n; ++t) {
        env[t] = spline(static_cast<double>(t));
    }
    return env;
}

inline bool has_oscillation(std::span<const double> x) {
    const Extrema e = find_extrema(x);
    return e.maxima.size() >= 2 && e.minima.size() >= 2;
}

} // namespace detail

struct EmdParams {
    std::size_t max_imfs = 8;
    std::size_t s_number = 4;   // consecutive stable siftings required
    std::size_t max_sifts = 100;
};

/// Empirical mode decomposition by envelope-mean sifting.
///
/// Sifting of one IMF stops once the extrema and zero-crossing counts differ
/// by at most one and have not changed for `s_number` consecutive siftings.
/// Extraction stops when the residue lacks two maxima and two minima or
/// `max_imfs` IMFs exist. The residue is input − Σ IMF.
inline DecompositionResult emd(std::span<const double> y, const EmdParams& params = {}) {
    require(y.size() >= 8, ErrorCode::TooShort, "EMD needs at least 8 samples");
    require(!any_missing(y), ErrorCode::InvalidArgument, "EMD input must not contain missing values");
    const std::size_t n = y.size();

    DecompositionResult result;
    result.method = Method::EMD;
    result.source_length = n;
    result.params = {{"max_imfs", params.max_imfs}, {"s_number", params.s_number}, {"max_sifts", params.max_sifts}};

    std::vector<double> residual(y.begin(), y.end());
    std::size_t total_sifts = 0;
    while (result.components.size() < params.max_imfs && detail::has_oscillation(residual)) {
        std::vector<double> h = residual;
        std::size_t stable = 0;
        std::size_t prev_extrema = 0;
        std::size_t prev_crossings = 0;
        for (std::size_t sift = 0; sift < params.max_sifts; ++sift) {
            const Extrema e = find_extrema(h);
            if (e.maxima.size() < 2 || e.minima.size() < 2) {
                break;
            }
            const auto upper = detail::envelope(h, e.maxima, true);
            const auto lower = detail::envelope(h, e.minima, false);
            for (std::size_t t = 0; t < n; ++t) {
                h[t] -= 0.5 * (upper[t] + lower[t]);
            }
            ++total_sifts;
            const Extrema after = find_extrema(h);
            const std::size_t extrema = after.maxima.size() + after.minima.size();
            const std::size_t crossings = zero_crossings(h);
            const bool balanced = (extrema > crossings ? extrema - crossings : crossings - extrema) <= 1;
            if (balanced && sift > 0 && extrema == prev_extrema && crossings == prev_crossings) {
                ++stable;
            } else {
                stable = 0;
            }
            prev_extrema = extrema;
            prev_crossings = crossings;
            if (stable >= params.s_number) {
                break;
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            residual[t] -= h[t];
        }
        result.components.push_back(
            {"imf_" + std::to_string(result.components.size() + 1), std::move(h), std::nullopt, std::nullopt});
    }

    std::vector<double> residue(y.begin(), y.end());
    for (const auto& c : result.components) {
        for (std::size_t t = 0; t < n; ++t) {
            residue[t] -= c.values[t];
        }
    }
    result.components.push_back({"residue", std::move(residue), std::nullopt, std::nullopt});
    result.iterations = total_sifts;
    return result;
}

inline DecompositionResult emd(const TimeSeries& series, const EmdParams& params = {}) {
    return emd(series.values(), params);
}

struct EemdParams {
    std::size_t ensemble_size = 100;
    double noise_std = 0.2; // fraction of the input standard deviation
    std::size_t max_imfs = 8;
    std::size_t s_number = 4;
    std::size_t max_sifts = 100;
    std::uint64_t seed = 0;

    void validate() const {
        require(ensemble_size >= 1, ErrorCode::InvalidArgument, "EEMD ensemble size must be at least 1");
        require(noise_std >= 0.0, ErrorCode::InvalidArgument, "EEMD noise must be non-negative");
    }
};

/// Ensemble EMD: IMFs averaged by extraction order over EMDs of the input
/// plus white noise. Member m draws its noise from stream (seed, m). The
/// residue is input − Σ mean IMF.
inline DecompositionResult eemd(std::span<const double> y, const EemdParams& params = {}) {
    params.validate();
    require(y.size() >= 8, ErrorCode::TooShort, "EEMD needs at least 8 samples");
    const std::size_t n = y.size();

    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) {
        var += (v - mean) * (v - mean);
    }
    const double sigma = std::sqrt(var / static_cast<double>(n)) * params.noise_std;

    const EmdParams emd_params{params.max_imfs, params.s_number, params.max_sifts};
    std::vector<std::vector<double>> sums;
    std::size_t total_sifts = 0;
    std::vector<double> member(n);
    for (std::size_t m = 0; m < params.ensemble_size; ++m) {
        Rng rng(derive_seed(params.seed, m));
        for (std::size_t t = 0; t < n; ++t) {
            member[t] = y[t] + sigma * rng.normal();
        }
        const DecompositionResult r = emd(member, emd_params);
        total_sifts += r.iterations;
        const std::size_t imfs = r.components.size() - 1;
        if (sums.size() < imfs) {
            sums.resize(imfs, std::vector<double>(n, 0.0));
        }
        for (std::size_t k = 0; k < imfs; ++k) {
            for (std::size_t t = 0; t < n; ++t) {
                sums[k][t] += r.components[k].values[t];
            }
        }
    }

    DecompositionResult result;
    result.method = Method::EEMD;
    result.source_length = n;
    result.iterations = total_sifts;
    result.params = {{"ensemble_size", params.ensemble_size}, {"noise_std", params.noise_std},
                     {"max_imfs", params.max_imfs},           {"s_number", params.s_number},
                     {"seed", params.seed}};
    const double inv = 1.0 / static_cast<double>(params.ensemble_size);
    std::vector<double> residue(y.begin(), y.end());
    for (std::size_t k = 0; k < sums.size(); ++k) {
        for (std::size_t t = 0; t < n; ++t) {
            sums[k][t] *= inv;
        }
        for (std::size_t t = 0; t < n; ++t) {
            residue[t] -= sums[k][t];
        }
        result.components.push_back({"imf_" + std::to_string(k + 1), std::move(sums[k]), std::nullopt, std::nullopt});
    }
    result.components.push_back({"residue", std::move(residue), std::nullopt, std::nullopt});
    return result;
}

inline DecompositionResult eemd(const TimeSeries& series, const EemdParams& params = {}) {
    return eemd(series.values(), params);
}

} // namespace pvfc::decomp
