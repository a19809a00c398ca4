#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "rlt/tensor.hpp"

namespace rlt {

// Named parameters with same-shape gradient slots.
class ParameterSet {
public:
    Tensor& add(const std::string& name, Tensor value) {
        if (params_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
        grads_[name] = Tensor::zeros(value.shape);
        return params_[name] = std::move(value);
    }

    Tensor& param(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
        return it->second;
    }
    const Tensor& param(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
        return it->second;
    }

    Tensor& grad(const std::string& name) {
        auto it = grads_.find(name);
        if (it == grads_.end()) throw std::out_of_range("unknown gradient: " + name);
        return it->second;
    }

    const std::map<std::string, Tensor>& params() const { return params_; }
    std::map<std::string, Tensor>& params() { return params_; }
    std::map<std::string, Tensor>& grads() { return grads_; }

    void zero_grad() {
        for (auto& [name, g] : grads_) g.fill(0.0);
    }

    void copy_values_from(const ParameterSet& other) {
        for (auto& [name, p] : params_) p = other.param(name);
    }

    std::string architecture;  // "dense" | "transformer"

private:
    std::map<std::string, Tensor> params_;
    std::map<std::string, Tensor> grads_;
};

// penalty = l1 * sum|w| + l2 * sum w^2, gradient contribution added in place
inline double regularization_penalty(ParameterSet& ps, double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0) throw std::invalid_argument("negative regularization coefficient");
    if (l1 == 0.0 && l2 == 0.0) return 0.0;
    double penalty = 0.0;
    for (auto& [name, p] : ps.params()) {
        Tensor& g = ps.grad(name);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double w = p.data[i];
            penalty += l1 * std::abs(w) + l2 * w * w;
            g.data[i] += l1 * (w > 0.0 ? 1.0 : w < 0.0 ? -1.0 : 0.0) + 2.0 * l2 * w;
        }
    }
    return penalty;
}

// Bias-corrected Adam over a ParameterSet. Gradients are zeroed after a step.
class AdamState {
public:
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(double lr = 1e-4) : learning_rate(lr) {}

    std::size_t step_count() const { return step_; }

    void step(ParameterSet& ps) {
        if (m_.empty()) {
            for (const auto& [name, p] : ps.params()) {
                m_[name] = Tensor::zeros(p.shape);
                v_[name] = Tensor::zeros(p.shape);
            }
        }
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
        for (auto& [name, p] : ps.params()) {
            Tensor& g = ps.grad(name);
            Tensor& m = m_.at(name);
            Tensor& v = v_.at(name);
            for (std::size_t i = 0; i < p.size(); ++i) {
                m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
                v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
                const double mhat = m.data[i] / bc1;
                const double vhat = v.data[i] / bc2;
                p.data[i] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
            }
        }
        ps.zero_grad();
    }

private:
    std::size_t step_ = 0;
    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
};

}  // namespace rlt
