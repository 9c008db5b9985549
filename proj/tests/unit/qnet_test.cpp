#include "pvfc/core/random.hpp"
#include "pvfc/forecast/mlp.hpp"
#include "pvfc/forecast/qnet.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace pvfc;
using namespace pvfc::forecast;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = scale * rng.normal();
        }
    }
    return m;
}

/// Residual signs of every output; a finite-difference step that flips any
/// of them straddles a kink of the pinball loss.
std::vector<bool> residual_signs(const Mlp& net, const Matrix& x, const Matrix& y) {
    const Matrix p = net.forward(x);
    std::vector<bool> s;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        s.push_back(y.data()[i] - p.data()[i] > 0);
    }
    return s;
}

FeatureFrame toy_frame(std::size_t days, std::uint64_t seed) {
    const int offset = 570;
    FeatureFrame f = FeatureFrame::contiguous(local_midnight({2020, 3, 1}, offset), kHour, days * 24, offset);
    Rng rng(seed);
    std::vector<double> power(f.size());
    std::vector<double> ghi(f.size());
    double cloud = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i % 24 == 0) {
            cloud = 0.4 + 0.6 * rng.uniform();
        }
        const double sun = std::max(0.0, std::sin((static_cast<double>(i % 24) - 6.0) / 12.0 * std::numbers::pi));
        ghi[i] = 1000 * sun * cloud;
        power[i] = 4.0 * sun * cloud;
    }
    f.add_real("power", FeatureTag::unknown_real(), power, "kW");
    f.add_real("ghi", FeatureTag::known_real(), ghi, "W/m2");
    f.add_static({"array_rating", FeatureTag::static_real(), 5.0, {}, "kW"});
    return f;
}

} // namespace

TEST(Pinball, HandValues) {
    // q = 0.1, residual +2 → 0.2; q = 0.9, residual −1 → 0.1
    Matrix pred(2, 1);
    pred << 1.0, 3.0;
    Matrix target(2, 1);
    target << 3.0, 2.0;
    const std::vector<double> qs{0.1, 0.9};
    Matrix g;
    EXPECT_NEAR(pinball_batch(pred, target, qs, &g), 0.2 + 0.1, 1e-15);
    EXPECT_NEAR(g(0, 0), -0.1, 1e-15);
    EXPECT_NEAR(g(1, 0), 0.1, 1e-15);

    const std::vector<double> y{3.0};
    EXPECT_NEAR(quantile_loss(y, {{1.0}, {4.0}}, qs), 0.2 + 0.1, 1e-15);
}

TEST(Pinball, MinimizedByTheEmpiricalQuantile) {
    Rng rng(5);
    std::vector<double> y(1001);
    for (double& v : y) {
        v = rng.normal();
    }
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const double q = 0.25;
    const double best = sorted[250];
    auto loss = [&](double c) {
        const std::vector<double> qs{q};
        return quantile_loss(y, {std::vector<double>(y.size(), c)}, qs);
    };
    EXPECT_LT(loss(best), loss(best + 0.05));
    EXPECT_LT(loss(best), loss(best - 0.05));
}

TEST(Mlp, GradientMatchesCentralDifferences) {
    Rng rng(17);
    const std::vector<double> qs{0.1, 0.5, 0.9};
    Mlp net(6, {5, 4}, 2 * qs.size(), rng);
    const Matrix x = random_matrix(6, 9, rng);
    const Matrix y = random_matrix(6, 9, rng);
    Mlp::Gradient g;
    net.loss_and_gradient(x, y, qs, g);
    const std::vector<double> analytic = Mlp::flatten(g);
    std::vector<double> p = net.parameters();
    ASSERT_EQ(p.size(), analytic.size());

    const double h = 1e-6;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        net.set_parameters(p);
        const auto sp = residual_signs(net, x, y);
        const double lp = pinball_batch(net.forward(x), y, qs);
        p[i] = keep - h;
        net.set_parameters(p);
        const auto sm = residual_signs(net, x, y);
        const double lm = pinball_batch(net.forward(x), y, qs);
        p[i] = keep;
        if (sp != sm) {
            continue;
        }
        const double numeric = (lp - lm) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        EXPECT_LE(std::abs(numeric - analytic[i]) / scale, 1e-4) << "parameter " << i;
        ++checked;
    }
    net.set_parameters(p);
    EXPECT_GT(checked, p.size() * 9 / 10);
}

TEST(Mlp, JsonRoundTripPreservesOutputs) {
    Rng rng(2);
    const Mlp net(3, {4}, 2, rng);
    const Mlp back = Mlp::from_json(net.to_json());
    const Matrix x = random_matrix(3, 5, rng);
    EXPECT_EQ(net.forward(x), back.forward(x));
    EXPECT_EQ(back.layers(), 2u);
}

TEST(Adam, DecoupledDecayShrinksWeightsOnly) {
    Rng rng(1);
    Mlp net(3, {4}, 2, rng);
    Rng rng2(1);
    Mlp ref(3, {4}, 2, rng2);
    for (std::size_t i = 0; i < net.parameters().size(); ++i) {
        ASSERT_EQ(net.parameters()[i], ref.parameters()[i]);
    }
    // nudge biases so decay would be visible on them too
    std::vector<double> p = net.parameters();
    for (double& v : p) {
        v += 0.5;
    }
    net.set_parameters(p);

    Mlp::Gradient zero;
    zero.weights = {Matrix::Zero(4, 3), Matrix::Zero(2, 4)};
    zero.biases = {Vector::Zero(4), Vector::Zero(2)};
    Adam adam(net, 0.01, 2.0);
    adam.step(net, zero);
    const std::vector<double> after = net.parameters();
    // layout per layer: weights then biases
    std::size_t at = 0;
    for (auto [rows, cols] : {std::pair{4, 3}, std::pair{2, 4}}) {
        for (int k = 0; k < rows * cols; ++k, ++at) {
            EXPECT_NEAR(after[at], p[at] * (1 - 0.01 * 2.0), 1e-15);
        }
        for (int k = 0; k < rows; ++k, ++at) {
            EXPECT_EQ(after[at], p[at]);
        }
    }
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
    Rng rng(3);
    Mlp net(2, {2}, 1, rng);
    const std::vector<double> before = net.parameters();
    Mlp::Gradient g;
    g.weights = {Matrix::Constant(2, 2, 0.3), Matrix::Constant(1, 2, -2.0)};
    g.biases = {Vector::Constant(2, 1e-3), Vector::Constant(1, -5.0)};
    Adam adam(net, 0.01, 0.0, 0.9, 0.999, 0.0);
    adam.step(net, g);
    const std::vector<double> after = net.parameters();
    const std::vector<double> flat = Mlp::flatten(g);
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_NEAR(after[i] - before[i], -0.01 * (flat[i] > 0 ? 1 : -1), 1e-9);
    }
}

TEST(QuantileNet, LearnsDiurnalShapeAndRoundTrips) {
    const FeatureFrame train = toy_frame(40, 1);
    const FeatureFrame val = toy_frame(12, 2);
    ForecastTask task;
    task.input_horizon = 24;
    TrainConfig cfg;
    cfg.hidden = {16};
    cfg.max_epochs = 60;
    cfg.batch_size = 8;
    cfg.seed = 4;
    const QuantileModel m = train_qnet(train, val, task, cfg);
    EXPECT_GT(m.log.train_windows, 30u);
    EXPECT_EQ(m.log.val_windows, 11u);
    EXPECT_GT(m.log.epochs.front().val_loss, m.log.best_val_loss);
    EXPECT_EQ(m.clip_max, 5.0);

    const FeatureFrame test = toy_frame(6, 3);
    const ForecastResult r = predict(m, test, 48);
    ASSERT_EQ(r.horizon(), 24u);
    const auto& y = test.column("power").data;
    double err = 0;
    double norm = 0;
    for (std::size_t i = 0; i < 24; ++i) {
        err += std::abs(r.point()[i] - y[48 + i]);
        norm += y[48 + i];
        for (std::size_t k = 1; k < r.quantiles.size(); ++k) {
            EXPECT_LE(r.values[k - 1][i], r.values[k][i]);
        }
        EXPECT_GE(r.values.front()[i], 0.0);
        EXPECT_LE(r.values.back()[i], 5.0);
    }
    EXPECT_LT(err / norm, 0.25);

    const auto path = (std::filesystem::temp_directory_path() / "pvfc_qnet_model.json").string();
    QuantileModel stamped = m;
    stamped.recipe_hash = "abc";
    save_model(stamped, path);
    const QuantileModel back = load_model(path, "abc");
    const ForecastResult r2 = predict(back, test, 48);
    for (std::size_t k = 0; k < r.quantiles.size(); ++k) {
        for (std::size_t i = 0; i < 24; ++i) {
            EXPECT_NEAR(r2.values[k][i], r.values[k][i], 1e-12);
        }
    }
    try {
        load_model(path, "def");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RecipeMismatch);
    }
    std::filesystem::remove(path);
}

TEST(QuantileNet, SameSeedSameModel) {
    const FeatureFrame train = toy_frame(20, 1);
    const FeatureFrame val = toy_frame(6, 2);
    ForecastTask task;
    task.input_horizon = 24;
    TrainConfig cfg;
    cfg.hidden = {8};
    cfg.max_epochs = 5;
    cfg.patience = 2;
    cfg.seed = 9;
    const QuantileModel a = train_qnet(train, val, task, cfg);
    const QuantileModel b = train_qnet(train, val, task, cfg);
    EXPECT_EQ(a.net.parameters(), b.net.parameters());
    cfg.seed = 10;
    EXPECT_NE(train_qnet(train, val, task, cfg).net.parameters(), a.net.parameters());
}

TEST(QuantileNet, NoWindowsIsAnError) {
    const FeatureFrame train = toy_frame(2, 1);
    const FeatureFrame val = toy_frame(6, 2);
    ForecastTask task;
    task.input_horizon = 72;
    try {
        train_qnet(train, val, task, TrainConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoWindows);
    }
}

TEST(QuantileNet, PredictNeedsKnownFeaturesOverHorizon) {
    const FeatureFrame train = toy_frame(10, 1);
    const FeatureFrame val = toy_frame(4, 2);
    ForecastTask task;
    task.input_horizon = 24;
    TrainConfig cfg;
    cfg.hidden = {4};
    cfg.max_epochs = 2;
    cfg.patience = 1;
    const QuantileModel m = train_qnet(train, val, task, cfg);
    FeatureFrame ctx = toy_frame(3, 3);
    std::vector<double> ghi = ctx.column("ghi").data;
    ghi[60] = kMissing;
    ctx.replace_data("ghi", ghi);
    try {
        predict(m, ctx, 48);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingKnownFeatures);
    }
    EXPECT_THROW(predict(m, ctx, 10), Error);
}
