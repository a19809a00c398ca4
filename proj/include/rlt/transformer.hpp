#pragma once

#include <vector>

#include "rlt/network.hpp"

namespace rlt {

struct TransformerConfig {
    std::size_t seq_len = 20;    // T, must match the lookback window
    std::size_t input_dim = 1;   // features per time step
    std::size_t d_model = 32;    // divisible by heads
    std::size_t heads = 2;
    std::size_t layers = 2;
    std::size_t ff_dim = 64;
    std::size_t output_dim = 3;
    double dropout = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

// Encoder-only transformer, post-layer-norm:
//   X0 = input * Win + bin + sinusoidal positions
//   per layer: X = LN1(X + dropout(MHA(X))); X = LN2(X + dropout(FFN(X)))
// The head reads the final time-step representation.
class TransformerNet : public Network {
public:
    explicit TransformerNet(TransformerConfig cfg, Rng& init_rng);

    // input is a seq_len x input_dim matrix; output a vector of output_dim
    Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
    void backward(const Tensor& output_grad) override;

    ParameterSet& params() override { return params_; }
    const ParameterSet& params() const override { return params_; }

    std::size_t input_width() const override { return cfg_.input_dim; }
    std::size_t output_width() const override { return cfg_.output_dim; }

    std::unique_ptr<Network> clone() const override;

    const TransformerConfig& config() const { return cfg_; }

private:
    TransformerConfig cfg_;
    ParameterSet params_;
    Tensor pos_encoding_;  // T x d, fixed

    struct LayerCache {
        Tensor x_in;                   // T x d, input to the attention block
        Tensor q, k, v;                // T x d each
        std::vector<Tensor> softmax;   // per head, T x T
        Tensor concat;                 // T x d attention output before Wo
        Tensor attn_drop_mask;         // T x d or empty
        Tensor ln1_xhat, ln1_inv_std;  // T x d, T
        Tensor x_mid;                  // T x d, LN1 output
        Tensor ff_pre;                 // T x ff, pre-ReLU
        Tensor ff_drop_mask;
        Tensor ln2_xhat, ln2_inv_std;
        Tensor x_out;  // T x d, LN2 output
    };
    Tensor input_cache_;
    std::vector<LayerCache> cache_;
    bool forward_recorded_ = false;

    std::size_t head_dim() const { return cfg_.d_model / cfg_.heads; }
};

}  // namespace rlt
