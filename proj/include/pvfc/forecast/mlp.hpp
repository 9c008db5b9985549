#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/random.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace pvfc::forecast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Quantile outputs are laid out point-major: output `i·Q + k` is point i at
/// quantile k.
inline double pinball_batch(const Matrix& pred, const Matrix& target, std::span<const double> quantiles,
                            Matrix* grad = nullptr) {
    const auto nq = static_cast<Eigen::Index>(quantiles.size());
    const double points = static_cast<double>(pred.cols()) * static_cast<double>(pred.rows() / nq);
    double total = 0.0;
    if (grad) {
        grad->resize(pred.rows(), pred.cols());
    }
    for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        for (Eigen::Index r = 0; r < pred.rows(); ++r) {
            const double q = quantiles[static_cast<std::size_t>(r % nq)];
            const double res = target(r, c) - pred(r, c);
            total += res > 0.0 ? q * res : (q - 1.0) * res;
            if (grad) {
                (*grad)(r, c) = (res > 0.0 ? -q : 1.0 - q) / points;
            }
        }
    }
    return total / points;
}

/// Fully connected network with softplus hidden units and a linear output
/// layer. Samples are columns.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, Rng& rng) {
        std::vector<std::size_t> dims{inputs};
        dims.insert(dims.end(), hidden.begin(), hidden.end());
        dims.push_back(outputs);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const double a = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
            Matrix w(static_cast<Eigen::Index>(dims[l + 1]), static_cast<Eigen::Index>(dims[l]));
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                for (Eigen::Index r = 0; r < w.rows(); ++r) {
                    w(r, c) = rng.uniform(-a, a);
                }
            }
            weights_.push_back(std::move(w));
            biases_.push_back(Vector::Zero(static_cast<Eigen::Index>(dims[l + 1])));
        }
    }

    std::size_t inputs() const { return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.front().cols()); }
    std::size_t outputs() const { return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.back().rows()); }
    std::size_t layers() const { return weights_.size(); }

    Matrix forward(const Matrix& x) const {
        Matrix a = x;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Matrix z = weights_[l] * a;
            z.colwise() += biases_[l];
            if (l + 1 < weights_.size()) {
                a = z.unaryExpr([](double v) { return softplus(v); });
            } else {
                a = std::move(z);
            }
        }
        return a;
    }

    struct Gradient {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
    };

    /// Batch pinball loss and its gradient with respect to every parameter.
    double loss_and_gradient(const Matrix& x, const Matrix& y, std::span<const double> quantiles,
                             Gradient& g) const {
        const std::size_t L = weights_.size();
        std::vector<Matrix> pre(L);
        std::vector<Matrix> act(L + 1);
        act[0] = x;
        for (std::size_t l = 0; l < L; ++l) {
            pre[l] = weights_[l] * act[l];
            pre[l].colwise() += biases_[l];
            act[l + 1] = l + 1 < L ? pre[l].unaryExpr([](double v) { return softplus(v); }) : pre[l];
        }
        Matrix delta;
        const double loss = pinball_batch(act[L], y, quantiles, &delta);
        g.weights.resize(L);
        g.biases.resize(L);
        for (std::size_t l = L; l-- > 0;) {
            if (l + 1 < L) {
                delta = delta.cwiseProduct(pre[l].unaryExpr([](double v) { return sigmoid(v); }));
            }
            g.weights[l] = delta * act[l].transpose();
            g.biases[l] = delta.rowwise().sum();
            if (l > 0) {
                delta = weights_[l].transpose() * delta;
            }
        }
        return loss;
    }

    std::vector<double> parameters() const {
        std::vector<double> p;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            p.insert(p.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
            p.insert(p.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
        }
        return p;
    }

    void set_parameters(std::span<const double> p) {
        std::size_t at = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            for (Eigen::Index i = 0; i < weights_[l].size(); ++i) {
                weights_[l].data()[i] = p[at++];
            }
            for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
                biases_[l].data()[i] = p[at++];
            }
        }
        require(at == p.size(), ErrorCode::ShapeMismatch, "parameter vector length mismatch");
    }

    static std::vector<double> flatten(const Gradient& g) {
        std::vector<double> p;
        for (std::size_t l = 0; l < g.weights.size(); ++l) {
            p.insert(p.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
            p.insert(p.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
        }
        return p;
    }

    nlohmann::json to_json() const {
        nlohmann::json layers = nlohmann::json::array();
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            layers.push_back({{"rows", weights_[l].rows()},
                              {"cols", weights_[l].cols()},
                              {"weights", std::vector<double>(weights_[l].data(),
                                                              weights_[l].data() + weights_[l].size())},
                              {"bias", std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size())}});
        }
        return layers;
    }

    static Mlp from_json(const nlohmann::json& j) {
        Mlp m;
        for (const auto& layer : j) {
            const auto rows = layer.at("rows").get<Eigen::Index>();
            const auto cols = layer.at("cols").get<Eigen::Index>();
            const auto w = layer.at("weights").get<std::vector<double>>();
            const auto b = layer.at("bias").get<std::vector<double>>();
            require(static_cast<Eigen::Index>(w.size()) == rows * cols && static_cast<Eigen::Index>(b.size()) == rows,
                    ErrorCode::ShapeMismatch, "model layer shape mismatch");
            m.weights_.push_back(Eigen::Map<const Matrix>(w.data(), rows, cols));
            m.biases_.push_back(Eigen::Map<const Vector>(b.data(), rows));
        }
        return m;
    }

private:
    friend class Adam;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
};

class Adam {
public:
    /// `weight_decay` shrinks weights (not biases) by lr · decay per step.
    explicit Adam(const Mlp& net, double lr, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            mw_.push_back(Matrix::Zero(net.weights_[l].rows(), net.weights_[l].cols()));
            vw_.push_back(mw_.back());
            mb_.push_back(Vector::Zero(net.biases_[l].size()));
            vb_.push_back(mb_.back());
        }
    }

    void step(Mlp& net, const Mlp::Gradient& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        const double rate = lr_ * std::sqrt(c2) / c1;
        const double eps = eps_ * std::sqrt(c2);
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            if (decay_ > 0.0) {
                net.weights_[l] *= 1.0 - lr_ * decay_;
            }
            update(net.weights_[l], mw_[l], vw_[l], g.weights[l], rate, eps);
            update(net.biases_[l], mb_[l], vb_[l], g.biases[l], rate, eps);
        }
    }

private:
    template <typename P, typename G>
    void update(P& p, P& m, P& v, const G& g, double rate, double eps) {
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        p.array() -= rate * m.array() / (v.array().sqrt() + eps);
    }

    double lr_;
    double decay_;
    double beta1_;
    double beta2_;
    double eps_;
    std::size_t t_ = 0;
    std::vector<Matrix> mw_;
    std::vector<Matrix> vw_;
    std::vector<Vector> mb_;
    std::vector<Vector> vb_;
};

} // namespace pvfc::forecast
