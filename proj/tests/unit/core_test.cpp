#include "pvfc/core/csv.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/frame_io.hpp"
#include "pvfc/core/parallel.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/split.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace pvfc;

namespace {

constexpr int kAliceSprings = 570;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected pvfc::Error";
    return ErrorCode::InvalidArgument;
}

FeatureFrame hourly_frame(LocalDate first, int days, int offset = kAliceSprings) {
    return FeatureFrame::contiguous(local_midnight(first, offset), kHour, static_cast<std::size_t>(days) * 24,
                                    offset);
}

} // namespace

TEST(Time, CivilRoundTripAcrossCenturies) {
    for (std::int64_t d = -800000; d <= 800000; d += 997) {
        EXPECT_EQ(days_since_epoch(date_from_days(d)), d);
    }
    EXPECT_EQ(days_since_epoch({1970, 1, 1}), 0);
    EXPECT_EQ(days_since_epoch({2000, 3, 1}) - days_since_epoch({2000, 2, 28}), 2);
    EXPECT_EQ(days_since_epoch({1900, 3, 1}) - days_since_epoch({1900, 2, 28}), 1);
}

TEST(Time, LocalMidnightUsesFixedOffset) {
    const Timestamp t = local_midnight({2019, 6, 1}, kAliceSprings);
    EXPECT_EQ(format_iso(t), "2019-05-31T14:30:00Z");
    const CivilTime c = to_civil(t, kAliceSprings);
    EXPECT_EQ(c.date, (LocalDate{2019, 6, 1}));
    EXPECT_EQ(c.hour, 0);
    EXPECT_EQ(c.minute, 0);
}

TEST(Time, NegativeOffsetsFloorToThePreviousDay) {
    const Timestamp t = make_utc({{2020, 1, 1}, 3, 0, 0});
    EXPECT_EQ(local_date(t, -300), (LocalDate{2019, 12, 31}));
}

TEST(Time, ParsesAcceptedForms) {
    EXPECT_EQ(parse_timestamp("2020-01-01"), make_utc({{2020, 1, 1}, 0, 0, 0}));
    EXPECT_EQ(parse_timestamp("2020-01-01 10:05"), make_utc({{2020, 1, 1}, 10, 5, 0}));
    EXPECT_EQ(parse_timestamp("2020-01-01T10:05:07Z", 570), make_utc({{2020, 1, 1}, 10, 5, 7}));
    EXPECT_EQ(parse_timestamp("2020-01-01T10:05:07.25+09:30"), make_utc({{2020, 1, 1}, 0, 35, 7}));
    EXPECT_EQ(parse_timestamp("2020-01-01 10:00", 570), make_utc({{2020, 1, 1}, 0, 30, 0}));
    EXPECT_EQ(parse_timestamp("\"2020-01-01 00:00:00\"\r"), make_utc({{2020, 1, 1}, 0, 0, 0}));
}

TEST(Time, RejectsMalformed) {
    for (const char* bad : {"2020-13-01", "2020-02-30", "2020/01/01", "20-01-01", "2020-01-01 25:00",
                            "2020-01-01T10", "2020-01-01 10:00 junk", ""}) {
        EXPECT_FALSE(parse_time(bad).has_value()) << bad;
        EXPECT_EQ(code_of([&] { parse_timestamp(bad); }), ErrorCode::MalformedTimestamp) << bad;
    }
}

TEST(Error, CategoriesDriveExitStatus) {
    EXPECT_EQ(category_of(ErrorCode::ConfigError), ErrorCategory::Config);
    EXPECT_EQ(category_of(ErrorCode::RecipeMismatch), ErrorCategory::Config);
    EXPECT_EQ(category_of(ErrorCode::MissingColumn), ErrorCategory::Data);
    EXPECT_EQ(category_of(ErrorCode::IoError), ErrorCategory::Data);
    EXPECT_EQ(category_of(ErrorCode::DivergedLoss), ErrorCategory::Numeric);
    const Error e(ErrorCode::ZeroYMax, "all zero");
    EXPECT_STREQ(e.what(), "ZeroYMax: all zero");
}

TEST(Random, SameSeedSameStream) {
    Rng a(derive_seed(42, 3));
    Rng b(derive_seed(42, 3));
    Rng c(derive_seed(42, 4));
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs |= x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Random, UniformAndNormalMoments) {
    Rng rng(7);
    const int n = 200000;
    double su = 0;
    double sn = 0;
    double sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 0.005);
    EXPECT_NEAR(sn / n, 0.0, 0.01);
    EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Random, ShuffleIsAPermutation) {
    Rng rng(1);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) {
        v[static_cast<std::size_t>(i)] = i;
    }
    rng.shuffle(std::span<int>(v));
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
    EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(TimeSeries, IndexingAndSlices) {
    const Timestamp t0 = make_utc({{2020, 1, 1}, 0, 0, 0});
    const TimeSeries s(t0, kHour, {1, 2, kMissing, 4});
    EXPECT_EQ(s.index_of(t0 + 2 * kHour), 2u);
    EXPECT_EQ(s.index_of(t0 + Duration{1800}), TimeSeries::npos);
    EXPECT_EQ(s.index_of(t0 + 4 * kHour), TimeSeries::npos);
    EXPECT_EQ(s.missing_count(), 1u);
    const TimeSeries tail = s.slice(1, 3);
    EXPECT_EQ(tail.start(), t0 + kHour);
    EXPECT_EQ(tail.size(), 2u);
    EXPECT_EQ(code_of([&] { TimeSeries(t0, kHour, {}); }), ErrorCode::TooShort);
}

TEST(FeatureFrame, TagsRoundTripThroughText) {
    for (const auto& tag : {FeatureTag::known_real(), FeatureTag::unknown_real(), FeatureTag::known_categorical(),
                            FeatureTag::unknown_categorical(), FeatureTag::static_real(),
                            FeatureTag::static_categorical()}) {
        EXPECT_EQ(FeatureTag::parse(tag.to_string()), tag);
    }
    EXPECT_EQ(FeatureTag::known_real().to_string(), "time_varying_known_real");
    EXPECT_EQ(code_of([] { FeatureTag::make(Temporal::Static, Knowledge::Unknown, Kind::Real); }),
              ErrorCode::InvalidArgument);
}

TEST(FeatureFrame, RejectsDuplicatesAndBadCategories) {
    FeatureFrame f = hourly_frame({2020, 1, 1}, 1);
    f.add_real("power", FeatureTag::unknown_real(), std::vector<double>(24, 1.0), "kW");
    EXPECT_EQ(code_of([&] { f.add_real("power", FeatureTag::unknown_real(), std::vector<double>(24)); }),
              ErrorCode::DuplicateColumn);
    EXPECT_EQ(code_of([&] { f.add_real("short", FeatureTag::unknown_real(), std::vector<double>(3)); }),
              ErrorCode::Misaligned);
    EXPECT_EQ(code_of([&] {
                  f.add_categorical("w", FeatureTag::known_categorical(), std::vector<double>(24, 2.0), {"a", "b"});
              }),
              ErrorCode::UnknownCategory);
    EXPECT_EQ(code_of([&] { f.column("nope"); }), ErrorCode::MissingColumn);
}

TEST(FeatureFrame, IndexMustBeStrictlyIncreasingOnGrid) {
    const Timestamp t0 = make_utc({{2020, 1, 1}, 0, 0, 0});
    EXPECT_EQ(code_of([&] { FeatureFrame({t0, t0 + Duration{1800}}, kHour); }), ErrorCode::Misaligned);
    EXPECT_EQ(code_of([&] { FeatureFrame({t0, t0}, kHour); }), ErrorCode::Misaligned);
    const FeatureFrame gappy({t0, t0 + 3 * kHour}, kHour);
    EXPECT_FALSE(gappy.is_contiguous());
}

TEST(FeatureFrame, AlignIntersectsAndMerges) {
    FeatureFrame a = hourly_frame({2020, 1, 1}, 2);
    a.add_real("x", FeatureTag::known_real(), std::vector<double>(48, 1.0));
    FeatureFrame b = a.slice(10, 30);
    b.drop_column("x");
    b.add_real("y", FeatureTag::unknown_real(), std::vector<double>(20, 2.0));
    const FeatureFrame m = align({a, b});
    EXPECT_EQ(m.size(), 20u);
    EXPECT_EQ(m.index().front(), a.index()[10]);
    EXPECT_TRUE(m.has_column("x"));
    EXPECT_TRUE(m.has_column("y"));

    FeatureFrame c = FeatureFrame::contiguous(a.index().back() + kHour, kHour, 5);
    EXPECT_EQ(code_of([&] { align({a, c}); }), ErrorCode::EmptyIntersection);
}

TEST(FrameIo, SaveLoadRoundTrip) {
    FeatureFrame f = hourly_frame({2020, 3, 1}, 2);
    std::vector<double> p(48);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = i % 5 == 0 ? kMissing : 0.1 * static_cast<double>(i) + 1e-13;
    }
    f.add_real("power", FeatureTag::unknown_real(), p, "kW");
    f.add_categorical("weather", FeatureTag::known_categorical(), std::vector<double>(48, 1.0),
                      {"sunny", "cloudy", "rainy"});
    f.add_static({"rating", FeatureTag::static_real(), 5.5, {}, "kW"});

    const auto dir = std::filesystem::temp_directory_path() / "pvfc_core_frame_io";
    std::filesystem::remove_all(dir);
    save_frame(f, dir);
    const FeatureFrame g = load_frame(dir);
    ASSERT_EQ(g.size(), f.size());
    EXPECT_EQ(g.utc_offset_minutes(), kAliceSprings);
    EXPECT_EQ(g.index().front(), f.index().front());
    const auto& q = g.column("power").data;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (is_missing(p[i])) {
            EXPECT_TRUE(is_missing(q[i]));
        } else {
            EXPECT_EQ(q[i], p[i]);
        }
    }
    EXPECT_EQ(g.column("weather").vocabulary, f.column("weather").vocabulary);
    EXPECT_EQ(g.column("power").tag, FeatureTag::unknown_real());
    EXPECT_EQ(g.static_field("rating").value, 5.5);
    std::filesystem::remove_all(dir);
}

TEST(Csv, SplitsQuotedRecords) {
    const auto f = csv::split_record(R"(a,"b,c","d""e",,f)");
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f[1], "b,c");
    EXPECT_EQ(f[2], "d\"e");
    EXPECT_EQ(f[3], "");
}

TEST(Csv, NumbersRoundTripExactly) {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-10, 10));
        EXPECT_EQ(csv::parse_number(csv::format_number(v)), v);
    }
    EXPECT_FALSE(csv::parse_number(" ").has_value());
    EXPECT_FALSE(csv::parse_number("nan").has_value());
    EXPECT_FALSE(csv::parse_number("1.5kW").has_value());
    EXPECT_EQ(csv::parse_number(" +2.5 "), 2.5);
    EXPECT_EQ(csv::format_fixed(1.005, 2).size(), 4u);
}

TEST(Csv, FnvMatchesReferenceVectors) {
    EXPECT_EQ(csv::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(csv::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(csv::fnv1a("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(csv::hex64(0xabcULL), "0000000000000abc");
}

TEST(Split, PartitionsWholeDaysWithMonthlyQuota) {
    const FeatureFrame f = hourly_frame({2019, 1, 1}, 365 + 31);
    const SplitSpec spec = SplitSpec::test_years(2020, 2020, 11);
    const SplitResult s = split(f, spec);
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), f.size());
    EXPECT_EQ(s.test_days.size(), 31u);
    EXPECT_EQ(s.train_days.size() + s.val_days.size(), 365u);
    EXPECT_EQ(s.val.size(), 24 * s.val_days.size());

    std::map<int, int> val_per_month;
    for (const auto& d : s.val_days) {
        ++val_per_month[d.month];
    }
    for (const auto& [month, count] : val_per_month) {
        const int days = month == 2 ? 28 : (month == 4 || month == 6 || month == 9 || month == 11) ? 30 : 31;
        EXPECT_EQ(static_cast<std::size_t>(count), validation_quota(static_cast<std::size_t>(days), 3, 1))
            << month;
    }
    std::set<LocalDate> seen(s.train_days.begin(), s.train_days.end());
    for (const auto& d : s.val_days) {
        EXPECT_FALSE(seen.contains(d));
    }
}

TEST(Split, DeterministicPerSeed) {
    const FeatureFrame f = hourly_frame({2019, 1, 1}, 120);
    SplitSpec spec;
    spec.test_begin = {2019, 4, 1};
    spec.test_end = {2019, 5, 1};
    spec.seed = 5;
    const SplitResult a = split(f, spec);
    const SplitResult b = split(f, spec);
    EXPECT_EQ(a.val_days, b.val_days);
    spec.seed = 6;
    EXPECT_NE(split(f, spec).val_days, a.val_days);
}

TEST(Split, EmptyTestPeriodFails) {
    const FeatureFrame f = hourly_frame({2019, 1, 1}, 10);
    EXPECT_EQ(code_of([&] { split(f, SplitSpec::test_years(2030, 2030)); }), ErrorCode::SpanTooShort);
}

TEST(Parallel, VisitsEveryIndexOnceAndRethrowsLowest) {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
    EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);

    try {
        parallel_for(20, 3, [](std::size_t i) {
            if (i == 7 || i == 13) {
                fail(ErrorCode::OutOfRange, std::to_string(i));
            }
        });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()), "OutOfRange: 7");
    }
}
