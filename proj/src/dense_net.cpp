#include "rlt/dense_net.hpp"

#include <cmath>
#include <stdexcept>

namespace rlt {

namespace {

double activate(const std::string& kind, double z) {
    if (kind == "tanh") return std::tanh(z);
    if (kind == "relu") return z > 0.0 ? z : 0.0;
    if (kind == "linear") return z;
    throw std::invalid_argument("unknown activation: " + kind);
}

double activate_grad(const std::string& kind, double z) {
    if (kind == "tanh") {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    if (kind == "relu") return z > 0.0 ? 1.0 : 0.0;
    return 1.0;
}

}  // namespace

DenseNet::DenseNet(DenseNetConfig cfg, Rng& init_rng) : cfg_(std::move(cfg)) {
    if (cfg_.widths.size() < 2) throw std::invalid_argument("dense net needs >= 2 widths");
    if (cfg_.dropout < 0.0 || cfg_.dropout >= 1.0)
        throw std::invalid_argument("dropout must be in [0,1)");
    params_.architecture = "dense";
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const std::size_t in = cfg_.widths[l], out = cfg_.widths[l + 1];
        Tensor w = Tensor::zeros({in, out});
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& v : w.data) v = init_rng.uniform(-bound, bound);
        params_.add(wname(l), std::move(w));
        params_.add(bname(l), Tensor::zeros({out}));
    }
    cache_.resize(layer_count());
}

Tensor DenseNet::forward(const Tensor& input, Mode mode, Rng& rng) {
    Tensor x = input.rank() == 1 ? Tensor::matrix(1, input.size(), input.data) : input;
    if (x.cols() != cfg_.widths.front())
        throw DimensionError("dense forward: input width " + std::to_string(x.cols()) +
                             " != layer W0 width " + std::to_string(cfg_.widths.front()));
    const bool record = mode == Mode::Train;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        if (record) cache_[l].input = x;
        Tensor z = matmul(x, params_.param(wname(l)));
        add_row_inplace(z, params_.param(bname(l)));
        const bool hidden = l + 1 < layer_count();
        if (hidden) {
            if (record) cache_[l].pre_act = z;
            Tensor a = z;
            for (std::size_t i = 0; i < a.size(); ++i)
                a.data[i] = activate(cfg_.activation, z.data[i]);
            if (mode == Mode::Train && cfg_.dropout > 0.0) {
                Tensor mask = Tensor::zeros(a.shape);
                const double keep = 1.0 - cfg_.dropout;
                for (std::size_t i = 0; i < mask.size(); ++i)
                    mask.data[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) a.data[i] *= mask.data[i];
                if (record) cache_[l].drop_mask = std::move(mask);
            } else if (record) {
                cache_[l].drop_mask = Tensor();
            }
            x = std::move(a);
        } else {
            x = std::move(z);  // linear head
        }
    }
    forward_recorded_ = record;
    return x;
}

void DenseNet::backward(const Tensor& output_grad) {
    if (!forward_recorded_) throw StateError("dense backward without a train-mode forward");
    Tensor g = output_grad.rank() == 1
                   ? Tensor::matrix(1, output_grad.size(), output_grad.data)
                   : output_grad;
    for (std::size_t l = layer_count(); l-- > 0;) {
        const bool hidden = l + 1 < layer_count();
        if (hidden) {
            const Tensor& mask = cache_[l].drop_mask;
            if (mask.size() > 0)
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] *= mask.data[i];
            const Tensor& z = cache_[l].pre_act;
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data[i] *= activate_grad(cfg_.activation, z.data[i]);
        }
        const Tensor& x = cache_[l].input;
        axpy(params_.grad(wname(l)), 1.0, matmul_tn(x, g));
        Tensor& bg = params_.grad(bname(l));
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) bg.data[j] += g.at(i, j);
        if (l > 0) g = matmul_nt(g, params_.param(wname(l)));
    }
}

std::unique_ptr<Network> DenseNet::clone() const {
    Rng dummy(0);
    auto copy = std::make_unique<DenseNet>(cfg_, dummy);
    copy->params_.copy_values_from(params_);
    return copy;
}

}  // namespace rlt
