// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace semra {

/// Fully connected network with SiLU hidden activations and a linear output
/// layer. Columns of the input matrix are samples. All parameters live in one
/// flat vector so optimizers and gradient checks can treat them uniformly.
class Mlp {
public:
    /// Activations kept by forward() for a later backward().
    struct Tape {
        std::vector<Eigen::MatrixXd> inputs;  // input to each layer
        std::vector<Eigen::MatrixXd> preact;  // pre-activation of each hidden layer
    };

    Mlp() = default;
    /// `sizes` lists input width, hidden widths, output width.
    explicit Mlp(std::vector<int> sizes);

    void init(std::mt19937_64& rng);

    const std::vector<int>& sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;

    /// Backpropagates `grad_out` (output_size x batch). Parameter gradients are
    /// accumulated into `grad_params`; returns the gradient w.r.t. the input.
    Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                             Eigen::VectorXd& grad_params) const;

private:
    struct LayerOffsets {
        Eigen::Index weights;
        Eigen::Index bias;
        int in;
        int out;
    };

    std::vector<int> sizes_;
    std::vector<LayerOffsets> layers_;
    Eigen::VectorXd params_;
};

/// Adaptive-moment gradient descent over a flat parameter vector.
class Adam {
public:
    Adam() = default;
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// Returns false (and leaves everything untouched) on a non-finite gradient.
    bool step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    std::int64_t steps() const { return t_; }

private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::int64_t t_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

}  // namespace semra
