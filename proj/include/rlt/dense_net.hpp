#pragma once

#include <string>
#include <vector>

#include "rlt/network.hpp"

namespace rlt {

struct DenseNetConfig {
    std::vector<std::size_t> widths;  // input, hidden..., output
    std::string activation = "tanh";  // tanh | relu | linear (hidden layers)
    double dropout = 0.0;             // [0, 1), hidden activations only
    double l1 = 0.0;
    double l2 = 0.0;
};

// Fully connected net: y = W_n(...act(W_1 x + b_1)...) + b_n, linear head.
// Inverted dropout after each hidden activation.
class DenseNet : public Network {
public:
    explicit DenseNet(DenseNetConfig cfg, Rng& init_rng);

    Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
    void backward(const Tensor& output_grad) override;

    ParameterSet& params() override { return params_; }
    const ParameterSet& params() const override { return params_; }

    std::size_t input_width() const override { return cfg_.widths.front(); }
    std::size_t output_width() const override { return cfg_.widths.back(); }

    std::unique_ptr<Network> clone() const override;

    const DenseNetConfig& config() const { return cfg_; }

private:
    DenseNetConfig cfg_;
    ParameterSet params_;

    // caches from the last Train-mode forward
    struct LayerCache {
        Tensor input;       // batch x in
        Tensor pre_act;     // batch x out (hidden layers only)
        Tensor drop_mask;   // scaled inverted-dropout mask, empty if unused
    };
    std::vector<LayerCache> cache_;
    bool forward_recorded_ = false;

    std::size_t layer_count() const { return cfg_.widths.size() - 1; }
    std::string wname(std::size_t l) const { return "W" + std::to_string(l); }
    std::string bname(std::size_t l) const { return "b" + std::to_string(l); }
};

}  // namespace rlt
