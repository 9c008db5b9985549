#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pvfc {

/// Sentinel for a missing sample. Missing samples keep their slot so that
/// index arithmetic stays trivial.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

inline bool any_missing(std::span<const double> values) noexcept {
    return std::any_of(values.begin(), values.end(), [](double v) { return is_missing(v); });
}

/// Uniformly sampled real sequence starting at a UTC instant.
class TimeSeries {
public:
    TimeSeries(Timestamp start, Duration resolution, std::vector<double> values,
               std::string unit = {})
        : start_(start), resolution_(resolution), values_(std::move(values)), unit_(std::move(unit)) {
        require(!values_.empty(), ErrorCode::TooShort, "time series needs at least one value");
        require(resolution_.count() > 0, ErrorCode::InvalidArgument, "resolution must be positive");
    }

    Timestamp start() const noexcept { return start_; }
    Duration resolution() const noexcept { return resolution_; }
    const std::string& unit() const noexcept { return unit_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    Timestamp time_at(std::size_t i) const {
        return start_ + resolution_ * static_cast<std::int64_t>(i);
    }
    Timestamp end() const { return time_at(values_.size()); }

    /// Index of `t`, or npos when `t` is off-grid or out of range.
    std::size_t index_of(Timestamp t) const {
        const auto offset = (t - start_).count();
        if (offset < 0 || offset % resolution_.count() != 0) {
            return npos;
        }
        const auto idx = static_cast<std::size_t>(offset / resolution_.count());
        return idx < values_.size() ? idx : npos;
    }

    TimeSeries slice(std::size_t begin, std::size_t end) const {
        require(begin < end && end <= values_.size(), ErrorCode::InvalidArgument,
                "invalid slice");
        return TimeSeries(time_at(begin), resolution_,
                          std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              values_.begin() + static_cast<std::ptrdiff_t>(end)),
                          unit_);
    }

    TimeSeries with_values(std::vector<double> values) const {
        return TimeSeries(start_, resolution_, std::move(values), unit_);
    }

    std::size_t missing_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(values_.begin(), values_.end(), [](double v) { return is_missing(v); }));
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    Timestamp start_;
    Duration resolution_;
    std::vector<double> values_;
    std::string unit_;
};

} // namespace pvfc
