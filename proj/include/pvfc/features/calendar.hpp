#pragma once

#include "pvfc/core/time.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace pvfc::features {

struct MonthEncoding {
    double sin_month = 0.0;
    double cos_month = 1.0;
};

/// Cyclic month code in local time: (sin 2πm/12, cos 2πm/12), m in 1..12.
inline MonthEncoding month_cyclic(Timestamp t, int utc_offset_minutes = 0) {
    const int m = local_date(t, utc_offset_minutes).month;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / 12.0;
    // exact zeros at quarter turns keep the encoding tidy
    auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
    return {snap(std::sin(angle)), snap(std::cos(angle))};
}

/// Southern-hemisphere seasons by calendar month.
enum class Season { Summer = 0, Autumn = 1, Winter = 2, Spring = 3 };

inline Season season_of_month(int month) {
    switch (month) {
    case 12: case 1: case 2: return Season::Summer;
    case 3: case 4: case 5: return Season::Autumn;
    case 6: case 7: case 8: return Season::Winter;
    default: return Season::Spring;
    }
}

inline std::vector<std::string> season_vocabulary() { return {"summer", "autumn", "winter", "spring"}; }

} // namespace pvfc::features
