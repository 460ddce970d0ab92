// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "semra/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace semra {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw std::invalid_argument("mlp: layer sizes must be >= 1");
        LayerOffsets lo{off, off + static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1], sizes_[l], sizes_[l + 1]};
        off = lo.bias + sizes_[l + 1];
        layers_.push_back(lo);
    }
    params_ = Eigen::VectorXd::Zero(off);
}

void Mlp::init(std::mt19937_64& rng) {
    params_.setZero();
    for (const auto& l : layers_) {
        // Glorot-uniform weights, zero biases.
        const double limit = std::sqrt(6.0 / (l.in + l.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l.in) * l.out; ++i) {
            params_[l.weights + i] = dist(rng);
        }
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape* tape) const {
    if (x.rows() != input_size()) {
        throw std::invalid_argument("mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                                    std::to_string(input_size()));
    }
    if (tape) {
        tape->inputs.clear();
        tape->preact.clear();
    }
    Eigen::MatrixXd a = x;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const auto& l = layers_[li];
        Eigen::Map<const Eigen::MatrixXd> w(params_.data() + l.weights, l.out, l.in);
        Eigen::Map<const Eigen::VectorXd> b(params_.data() + l.bias, l.out);
        Eigen::MatrixXd z = w * a;
        z.colwise() += b;
        if (tape) tape->inputs.push_back(std::move(a));
        if (li + 1 == layers_.size()) return z;
        a = z.unaryExpr([](double v) { return v * sigmoid(v); });
        if (tape) tape->preact.push_back(std::move(z));
    }
    return a;  // unreachable: at least one layer
}

Eigen::MatrixXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                              Eigen::VectorXd& grad_params) const {
    if (grad_params.size() != params_.size()) grad_params = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd g = grad_out;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& l = layers_[li];
        Eigen::Map<const Eigen::MatrixXd> w(params_.data() + l.weights, l.out, l.in);
        Eigen::Map<Eigen::MatrixXd> gw(grad_params.data() + l.weights, l.out, l.in);
        Eigen::Map<Eigen::VectorXd> gb(grad_params.data() + l.bias, l.out);
        gw.noalias() += g * tape.inputs[li].transpose();
        gb += g.rowwise().sum();
        Eigen::MatrixXd prev = w.transpose() * g;
        if (li > 0) {
            const auto& z = tape.preact[li - 1];
            prev = prev.cwiseProduct(z.unaryExpr([](double v) {
                const double s = sigmoid(v);
                return s * (1.0 + v * (1.0 - s));
            }));
        }
        g = std::move(prev);
    }
    return g;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

bool Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (!grad.allFinite()) return false;
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
    return true;
}

}  // namespace semra
