#include "pvfc/core/random.hpp"
#include "pvfc/decomp/emd.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pvfc;
using namespace pvfc::decomp;

namespace {

double max_abs(std::span<const double> v) {
    double m = 0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

/// Natural spline second derivatives from the full dense system.
std::vector<double> spline_m_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    A(0, 0) = 1;
    A(n - 1, n - 1) = 1;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double h0 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i - 1)];
        const double h1 = x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)];
        A(i, i - 1) = h0;
        A(i, i) = 2 * (h0 + h1);
        A(i, i + 1) = h1;
        b(i) = 6 * ((y[static_cast<std::size_t>(i + 1)] - y[static_cast<std::size_t>(i)]) / h1 -
                    (y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i - 1)]) / h0);
    }
    const Eigen::VectorXd m = A.fullPivLu().solve(b);
    return {m.data(), m.data() + n};
}

double spline_eval_oracle(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& m,
                          double t) {
    std::size_t k = 1;
    while (k + 1 < x.size() && t > x[k]) {
        ++k;
    }
    const double h = x[k] - x[k - 1];
    const double a = (x[k] - t) / h;
    const double b = (t - x[k - 1]) / h;
    return a * y[k - 1] + b * y[k] + ((a * a * a - a) * m[k - 1] + (b * b * b - b) * m[k]) * h * h / 6;
}

} // namespace

TEST(Spline, MatchesDenseNaturalSplineSolve) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng.below(30);
        std::vector<double> x(n);
        std::vector<double> y(n);
        double t = rng.uniform(-5, 5);
        for (std::size_t i = 0; i < n; ++i) {
            t += 0.1 + rng.uniform();
            x[i] = t;
            y[i] = rng.normal();
        }
        const NaturalCubicSpline s(x, y);
        const auto m = spline_m_oracle(x, y);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(s(x[i]), y[i], 1e-12);
        }
        for (int k = 0; k < 50; ++k) {
            const double q = rng.uniform(x.front(), x.back());
            EXPECT_NEAR(s(q), spline_eval_oracle(x, y, m, q), 1e-10);
        }
    }
}

TEST(Spline, TwoKnotsIsLinear) {
    const NaturalCubicSpline s({0, 2}, {1, 5});
    EXPECT_DOUBLE_EQ(s(1), 3);
    EXPECT_DOUBLE_EQ(s(3), 7);
}

TEST(Extrema, FlatRunsCountOnceAtTheirMiddle) {
    const std::vector<double> x{0, 1, 3, 3, 3, 1, 0, -2, -2, 0, 5};
    const Extrema e = find_extrema(x);
    EXPECT_EQ(e.maxima, std::vector<std::size_t>{3});
    EXPECT_EQ(e.minima, std::vector<std::size_t>{7});
    EXPECT_EQ(zero_crossings(std::vector<double>{1, 0, -1, -2, 0, 0, 3, -1}), 3u);
}

TEST(Emd, SeparatesTwoTones) {
    const std::size_t n = 1000;
    std::vector<double> fast(n);
    std::vector<double> slow(n);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        fast[t] = std::sin(2 * std::numbers::pi * static_cast<double>(t) / 12.0);
        slow[t] = 2 * std::sin(2 * std::numbers::pi * static_cast<double>(t) / 150.0);
        y[t] = fast[t] + slow[t];
    }
    const auto r = emd(y);
    ASSERT_GE(r.components.size(), 3u);
    const auto& imf1 = r.components[0].values;
    double err = 0;
    double norm = 0;
    for (std::size_t t = 100; t + 100 < n; ++t) {
        err += (imf1[t] - fast[t]) * (imf1[t] - fast[t]);
        norm += fast[t] * fast[t];
    }
    EXPECT_LT(std::sqrt(err / norm), 0.1);
    EXPECT_LE(r.max_abs_error(y), 1e-8 * max_abs(y));
    EXPECT_EQ(r.components.back().name, "residue");
}

TEST(Emd, AdditiveOnRandomSeries) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 240 + rng.below(700);
        std::vector<double> y(n);
        double walk = 0;
        for (std::size_t t = 0; t < n; ++t) {
            walk += rng.normal();
            y[t] = walk + 3 * std::sin(static_cast<double>(t) / 4.0);
        }
        const auto r = emd(y);
        EXPECT_LE(r.max_abs_error(y), 1e-8 * max_abs(y));
        EXPECT_LE(r.components.size(), 9u);
    }
}

TEST(Emd, MonotoneInputIsAllResidue) {
    std::vector<double> y(50);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = static_cast<double>(t * t);
    }
    const auto r = emd(y);
    ASSERT_EQ(r.components.size(), 1u);
    EXPECT_EQ(r.components[0].values, y);
}

TEST(Emd, RejectsShortInput) {
    EXPECT_THROW(emd(std::vector<double>(5, 1.0)), Error);
}

TEST(Eemd, SeededAndAdditive) {
    Rng rng(6);
    std::vector<double> y(300);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = std::sin(static_cast<double>(t) / 3.0) + 0.5 * rng.normal();
    }
    EemdParams p;
    p.ensemble_size = 10;
    p.seed = 77;
    const auto a = eemd(y, p);
    const auto b = eemd(y, p);
    ASSERT_EQ(a.components.size(), b.components.size());
    for (std::size_t k = 0; k < a.components.size(); ++k) {
        EXPECT_EQ(a.components[k].values, b.components[k].values);
    }
    EXPECT_LE(a.max_abs_error(y), 1e-8 * max_abs(y));
    p.seed = 78;
    const auto c = eemd(y, p);
    EXPECT_NE(a.components[0].values, c.components[0].values);
}

TEST(Eemd, ZeroNoiseSingleMemberEqualsEmd) {
    Rng rng(6);
    std::vector<double> y(200);
    for (double& v : y) {
        v = rng.normal();
    }
    EemdParams p;
    p.ensemble_size = 1;
    p.noise_std = 0;
    const auto a = eemd(y, p);
    const auto b = emd(y);
    ASSERT_EQ(a.components.size(), b.components.size());
    for (std::size_t k = 0; k + 1 < a.components.size(); ++k) {
        EXPECT_EQ(a.components[k].values, b.components[k].values);
    }
}
