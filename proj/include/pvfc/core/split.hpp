#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/time.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace pvfc {

/// Train/validation/test partition settings. Validation days are drawn per
/// calendar month in proportion `val_parts / (train_parts + val_parts)`.
struct SplitSpec {
    int train_parts = 3;
    int val_parts = 1;
    LocalDate test_begin{2020, 1, 1}; // inclusive
    LocalDate test_end{2021, 1, 1};   // exclusive
    std::uint64_t seed = 0;

    static SplitSpec test_years(int first_year, int last_year, std::uint64_t seed = 0) {
        SplitSpec s;
        s.test_begin = {first_year, 1, 1};
        s.test_end = {last_year + 1, 1, 1};
        s.seed = seed;
        return s;
    }
};

struct SplitResult {
    FeatureFrame train;
    FeatureFrame val;
    FeatureFrame test;
    std::vector<LocalDate> train_days;
    std::vector<LocalDate> val_days;
    std::vector<LocalDate> test_days;
};

/// Local calendar day of every row.
inline std::vector<LocalDate> row_dates(const FeatureFrame& frame) {
    std::vector<LocalDate> dates;
    dates.reserve(frame.size());
    for (Timestamp t : frame.index()) {
        dates.push_back(local_date(t, frame.utc_offset_minutes()));
    }
    return dates;
}

/// Number of validation days drawn from a month holding `days` days.
inline std::size_t validation_quota(std::size_t days, int train_parts, int val_parts) {
    const double share = static_cast<double>(val_parts) / static_cast<double>(train_parts + val_parts);
    return static_cast<std::size_t>(std::floor(static_cast<double>(days) * share + 0.5));
}

/// Partitions whole local days into train, validation and test sets.
inline SplitResult split(const FeatureFrame& frame, const SplitSpec& spec) {
    require(spec.train_parts > 0 && spec.val_parts > 0, ErrorCode::InvalidArgument,
            "split ratio parts must be positive");
    require(spec.test_begin < spec.test_end, ErrorCode::InvalidArgument, "empty test period");

    const std::vector<LocalDate> dates = row_dates(frame);
    std::set<LocalDate> test_days;
    std::map<std::pair<int, int>, std::vector<LocalDate>> months;
    for (const LocalDate& d : dates) {
        if (d >= spec.test_begin && d < spec.test_end) {
            test_days.insert(d);
        } else {
            auto& bucket = months[{d.year, d.month}];
            if (bucket.empty() || bucket.back() != d) {
                bucket.push_back(d);
            }
        }
    }
    require(!test_days.empty(), ErrorCode::SpanTooShort, "frame has no rows in the test period");
    require(!months.empty(), ErrorCode::SpanTooShort, "frame has no rows outside the test period");

    std::set<LocalDate> val_days;
    for (auto& [key, days] : months) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(key.first * 12 + key.second)));
        std::vector<LocalDate> shuffled = days;
        rng.shuffle(std::span<LocalDate>(shuffled));
        const std::size_t quota = validation_quota(days.size(), spec.train_parts, spec.val_parts);
        val_days.insert(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota));
    }

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    std::vector<std::size_t> test_rows;
    std::vector<LocalDate> train_list;
    std::vector<LocalDate> val_list;
    std::vector<LocalDate> test_list;
    auto push_day = [](std::vector<LocalDate>& list, const LocalDate& d) {
        if (list.empty() || list.back() != d) {
            list.push_back(d);
        }
    };
    for (std::size_t r = 0; r < dates.size(); ++r) {
        const LocalDate& d = dates[r];
        if (test_days.contains(d)) {
            test_rows.push_back(r);
            push_day(test_list, d);
        } else if (val_days.contains(d)) {
            val_rows.push_back(r);
            push_day(val_list, d);
        } else {
            train_rows.push_back(r);
            push_day(train_list, d);
        }
    }

    return SplitResult{frame.select_rows(train_rows), frame.select_rows(val_rows),
                       frame.select_rows(test_rows), std::move(train_list), std::move(val_list),
                       std::move(test_list)};
}

} // namespace pvfc
