#include "pvfc/core/random.hpp"
#include "pvfc/features/build_frame.hpp"
#include "pvfc/forecast/strategy.hpp"
#include "pvfc/forecast/task.hpp"
#include "pvfc/forecast/windows.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pvfc;
using namespace pvfc::forecast;

namespace {

constexpr int kOffset = 570;

FeatureFrame solar_frame(std::size_t days, std::uint64_t seed) {
    FeatureFrame f =
        FeatureFrame::contiguous(local_midnight({2021, 1, 1}, kOffset), kHour, days * 24, kOffset);
    Rng rng(seed);
    std::vector<double> power(f.size());
    std::vector<double> ghi(f.size());
    std::vector<double> zenith(f.size());
    double cloud = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i % 24 == 0) {
            cloud = 0.3 + 0.7 * rng.uniform();
        }
        const double sun = std::sin((static_cast<double>(i % 24) - 6.0) / 12.0 * std::numbers::pi);
        zenith[i] = sun > 0 ? 90.0 - 80.0 * sun : 100.0;
        ghi[i] = 1000 * std::max(0.0, sun) * cloud;
        power[i] = 4.5 * std::max(0.0, sun) * cloud;
    }
    f.add_real("power", FeatureTag::unknown_real(), power, "kW");
    f.add_real("ghi", FeatureTag::known_real(), ghi, "W/m2");
    f.add_real(features::names::kZenith, FeatureTag::known_real(), zenith, "deg");
    f.add_static({"array_rating", FeatureTag::static_real(), 5.0, {}, "kW"});
    return f;
}

SplitResult day_split(const FeatureFrame& f, std::size_t train, std::size_t val) {
    SplitResult s{f, f, f, {}, {}, {}};
    const auto dates = row_dates(f);
    for (std::size_t r = 0; r < f.size(); r += 24) {
        const std::size_t d = r / 24;
        (d < train ? s.train_days : d < train + val ? s.val_days : s.test_days).push_back(dates[r]);
    }
    return s;
}

} // namespace

TEST(ForecastTask, ValidationAndJson) {
    ForecastTask t;
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(t.median_index(), 2u);
    const ForecastTask back = ForecastTask::from_json(t.to_json());
    EXPECT_EQ(back.quantiles, t.quantiles);
    EXPECT_EQ(back.input_horizon, 72u);
    EXPECT_EQ(back.stride, 24u);

    ForecastTask bad = t;
    bad.quantiles = {0.1, 0.9};
    EXPECT_THROW(bad.validate(), Error);
    bad.quantiles = {0.5, 0.25};
    EXPECT_THROW(bad.validate(), Error);
    bad = t;
    bad.input_horizon = 12;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(TrainConfig, JsonMergesOverBase) {
    TrainConfig base;
    base.batch_size = 8;
    base.seed = 3;
    const TrainConfig c = TrainConfig::from_json({{"learning_rate", 0.01}}, base);
    EXPECT_EQ(c.batch_size, 8u);
    EXPECT_EQ(c.seed, 3u);
    EXPECT_DOUBLE_EQ(c.learning_rate, 0.01);
    TrainConfig bad;
    bad.patience = bad.max_epochs;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(ForecastResult, MonotoneSortThenClip) {
    ForecastResult r;
    r.quantiles = {0.1, 0.5, 0.9};
    r.timestamps.resize(2);
    r.values = {{3.0, -1.0}, {1.0, 0.5}, {2.0, 9.0}};
    r.enforce_monotone();
    EXPECT_EQ(r.values[0], (std::vector<double>{1.0, -1.0}));
    EXPECT_EQ(r.values[1], (std::vector<double>{2.0, 0.5}));
    EXPECT_EQ(r.values[2], (std::vector<double>{3.0, 9.0}));
    r.clip(0.0, 5.0);
    EXPECT_EQ(r.values[0][1], 0.0);
    EXPECT_EQ(r.values[2][1], 5.0);
    EXPECT_EQ(r.point(), (std::vector<double>{2.0, 0.5}));
    EXPECT_THROW(r.track(0.3), Error);
}

TEST(SeasonalNaive, RepeatsTheLastPeriod) {
    const Timestamp t0 = local_midnight({2021, 6, 1}, 0);
    const TimeSeries h(t0, kHour, {1, 2, 3, 4, 5, 6});
    const ForecastResult r = seasonal_naive(h, 3, 5);
    EXPECT_EQ(r.point(), (std::vector<double>{4, 5, 6, 4, 5}));
    EXPECT_EQ(r.values.size(), 5u);
    EXPECT_EQ(r.timestamps.front(), t0 + 6 * kHour);
    EXPECT_THROW(seasonal_naive(h, 7, 1), Error);
}

TEST(Windows, OriginsAnchorOnLocalMidnight) {
    const FeatureFrame f = solar_frame(6, 1);
    ForecastTask task;
    task.input_horizon = 24;
    const auto& y = f.column("power").data;
    const auto origins = window_origins(f, y, std::vector<bool>(f.size(), true), task);
    EXPECT_EQ(origins, (std::vector<std::size_t>{24, 48, 72, 96, 120}));

    task.stride = 6;
    EXPECT_EQ(window_origins(f, y, std::vector<bool>(f.size(), true), task).size(), 5u * 4 - 3);
}

TEST(Windows, MasksAndMissingTargetsDropOrigins) {
    const FeatureFrame f = solar_frame(6, 1);
    ForecastTask task;
    task.input_horizon = 24;
    std::vector<double> y = f.column("power").data;
    std::vector<bool> allowed(f.size(), true);
    allowed[50] = false;
    y[100] = kMissing;
    EXPECT_EQ(window_origins(f, y, allowed, task), (std::vector<std::size_t>{24, 72, 120}));
    EXPECT_THROW(window_origins(f, y, std::vector<bool>(3, true), task), Error);
}

TEST(Windows, EncoderLayoutWidthAndOneHot) {
    FeatureFrame f = solar_frame(4, 2);
    std::vector<double> season(f.size(), 2.0);
    season[30] = 0.0;
    f.add_categorical("season", FeatureTag::known_categorical(), season, {"a", "b", "c"});
    ForecastTask task;
    task.input_horizon = 24;
    const InputLayout layout = InputLayout::from_frame(f, task);
    // power 24, ghi 48, zenith 48, season 3·48, rating 1
    EXPECT_EQ(layout.width(), 24u + 48 + 48 + 144 + 1);
    const InputLayout back = InputLayout::from_json(layout.to_json());
    EXPECT_EQ(back.width(), layout.width());

    const features::NormalizationParams norm = features::fit_normalizer(f);
    const WindowEncoder enc(f, layout, norm, {{"array_rating", features::ColumnScale{0.0, 5.0}}});
    std::vector<double> x(layout.width());
    enc.encode(24, x.data());
    const std::size_t season_at = 24 + 48 + 48;
    // the window starts at frame row 0; row 30 holds category 0, the rest 2
    EXPECT_EQ(x[season_at + 0], 0.0);
    EXPECT_EQ(x[season_at + 2], 1.0);
    EXPECT_EQ(x[season_at + 30 * 3 + 0], 1.0);
    EXPECT_EQ(x[season_at + 30 * 3 + 2], 0.0);
    EXPECT_DOUBLE_EQ(x.back(), 1.0);
    EXPECT_TRUE(enc.window_fits(24));
    EXPECT_FALSE(enc.window_fits(80));
}

TEST(Windows, TargetsArePointMajor) {
    const std::vector<double> y{0, 1, 2, 3, 4, 5};
    const std::size_t origins[] = {2};
    const Matrix m = encode_targets(y, origins, 3, 2, features::ColumnScale{1.0, 2.0});
    ASSERT_EQ(m.rows(), 6);
    const double expect[] = {1, 1, 2, 2, 3, 3};
    for (int i = 0; i < 6; ++i) {
        EXPECT_DOUBLE_EQ(m(i, 0), expect[i]);
    }
}

TEST(Strategy, NamesRoundTrip) {
    for (Strategy s : {Strategy::Raw, Strategy::STL, Strategy::MSTL, Strategy::EMD, Strategy::EEMD, Strategy::VMD,
                       Strategy::VmdEemd}) {
        EXPECT_EQ(parse_strategy(strategy_name(s)), s);
    }
    try {
        parse_strategy("wavelet");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
}

TEST(Strategy, DecompositionConfigJson) {
    DecompositionConfig c;
    c.periods = {24, 168};
    c.seasonal_window = 61;
    c.vmd.modes = 3;
    const DecompositionConfig back = DecompositionConfig::from_json(c.to_json());
    EXPECT_EQ(back.periods, c.periods);
    EXPECT_EQ(back.seasonal_window, 61u);
    EXPECT_EQ(back.vmd.modes, 3u);
}

TEST(Strategy, FillMissingInterpolatesAndHolds) {
    const double m = kMissing;
    EXPECT_EQ(fill_missing(std::vector<double>{m, 2, m, m, 8, m}), (std::vector<double>{2, 2, 4, 6, 8, 8}));
    EXPECT_EQ(fill_missing(std::vector<double>{m, m}), (std::vector<double>{0, 0}));
}

TEST(Strategy, DecomposeDispatch) {
    std::vector<double> y(24 * 10);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = std::sin(2 * std::numbers::pi * static_cast<double>(t) / 24.0) + 0.001 * static_cast<double>(t);
    }
    DecompositionConfig c;
    EXPECT_EQ(decompose(Strategy::STL, y, c).components.size(), 3u);
    EXPECT_EQ(decompose(Strategy::MSTL, y, c).components.front().name, "trend");
    EXPECT_THROW(decompose(Strategy::Raw, y, c), Error);
    c.periods = {24, 48};
    EXPECT_THROW(decompose(Strategy::STL, y, c), Error);
}

TEST(Strategy, RolesFollowTheDaySplit) {
    const FeatureFrame f = solar_frame(10, 1);
    const SplitResult s = day_split(f, 6, 2);
    ForecastTask task;
    const DatasetRoles r = assign_roles(f, s, task);
    EXPECT_EQ(r.fit_rows.size(), 6u * 24);
    EXPECT_TRUE(r.train_rows[0]);
    EXPECT_TRUE(r.val_rows[6 * 24]);
    EXPECT_FALSE(r.train_rows[8 * 24]);
    EXPECT_EQ(r.decomposition_end, 8u * 24);
    EXPECT_EQ(r.test_origins, (std::vector<std::size_t>{8 * 24, 9 * 24}));
}

TEST(Strategy, ComponentsRecomposeAndNightIsZero) {
    const FeatureFrame f = solar_frame(30, 5);
    const SplitResult s = day_split(f, 22, 4);
    ForecastTask task;
    task.input_horizon = 48;
    const DatasetRoles roles = assign_roles(f, s, task);
    TrainConfig cfg;
    cfg.hidden = {8};
    cfg.max_epochs = 4;
    cfg.patience = 2;
    cfg.seed = 1;
    const StrategyModel m = fit_strategy(f, roles, Strategy::STL, DecompositionConfig{}, task, cfg);
    ASSERT_EQ(m.models.size(), 3u);
    EXPECT_EQ(m.component_names.front(), "trend");
    EXPECT_EQ(m.clip_max, 5.0);

    const auto out = m.forecast_detailed(f, roles.test_origins);
    ASSERT_EQ(out.size(), roles.test_origins.size());
    const auto& zen = f.column(features::names::kZenith).data;
    for (std::size_t c = 0; c < out.size(); ++c) {
        const StrategyForecast& sf = out[c];
        for (std::size_t q = 0; q < sf.sum.values.size(); ++q) {
            for (std::size_t i = 0; i < 24; ++i) {
                double total = 0;
                for (const auto& comp : sf.components) {
                    total += comp.values[q][i];
                }
                EXPECT_NEAR(sf.sum.values[q][i], total, 1e-12);
                const double v = sf.result.values[q][i];
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 5.0);
                if (zen[roles.test_origins[c] + i] > 90) {
                    EXPECT_EQ(v, 0.0);
                }
                if (q > 0) {
                    EXPECT_LE(sf.result.values[q - 1][i], v);
                }
            }
        }
    }

    const StrategyModel back = StrategyModel::from_json(m.to_json());
    const auto again = back.forecast_many(f, roles.test_origins);
    for (std::size_t c = 0; c < out.size(); ++c) {
        for (std::size_t q = 0; q < again[c].values.size(); ++q) {
            for (std::size_t i = 0; i < 24; ++i) {
                EXPECT_NEAR(again[c].values[q][i], out[c].result.values[q][i], 1e-12);
            }
        }
    }
}

TEST(Strategy, FitIsDeterministicAcrossJobs) {
    const FeatureFrame f = solar_frame(24, 8);
    const SplitResult s = day_split(f, 16, 4);
    ForecastTask task;
    task.input_horizon = 48;
    const DatasetRoles roles = assign_roles(f, s, task);
    TrainConfig cfg;
    cfg.hidden = {6};
    cfg.max_epochs = 3;
    cfg.patience = 1;
    const StrategyModel a = fit_strategy(f, roles, Strategy::MSTL, DecompositionConfig{}, task, cfg, 1);
    const StrategyModel b = fit_strategy(f, roles, Strategy::MSTL, DecompositionConfig{}, task, cfg, 3);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}
