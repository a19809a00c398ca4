#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rlt/transformer.hpp"

using rlt::Mode;
using rlt::Rng;
using rlt::Tensor;
using rlt::TransformerConfig;
using rlt::TransformerNet;

namespace {

double loss_of(TransformerNet& net, const Tensor& input, const Tensor& weights, Rng& rng) {
    const Tensor y = net.forward(input, Mode::Eval, rng);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += weights.data[i] * y.data[i];
    return l;
}

double max_rel_error(TransformerNet& net, const Tensor& input, std::uint64_t seed) {
    Rng rng(seed);
    Tensor w = Tensor::zeros({net.output_width()});
    for (auto& v : w.data) v = rng.uniform(-1.0, 1.0);

    net.params().zero_grad();
    net.forward(input, Mode::Train, rng);
    net.backward(w);

    const double h = 1e-5;
    double worst = 0.0;
    for (auto& [name, p] : net.params().params()) {
        const Tensor& g = net.params().grad(name);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p.data[i];
            p.data[i] = orig + h;
            const double lp = loss_of(net, input, w, rng);
            p.data[i] = orig - h;
            const double lm = loss_of(net, input, w, rng);
            p.data[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(g.data[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - g.data[i]) / denom);
        }
    }
    return worst;
}

TransformerConfig small_config() {
    TransformerConfig cfg;
    cfg.seq_len = 5;
    cfg.input_dim = 3;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.ff_dim = 8;
    cfg.output_dim = 3;
    return cfg;
}

}  // namespace

TEST_CASE("output has the configured width and is finite") {
    Rng rng(1);
    TransformerNet net(small_config(), rng);
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    const Tensor y = net.forward(x, Mode::Eval, rng);
    CHECK(y.size() == 3);
    CHECK(y.all_finite());
}

TEST_CASE("analytic gradients match central finite differences, one layer") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Rng rng(seed);
        TransformerNet net(small_config(), rng);
        Tensor x = Tensor::zeros({5, 3});
        for (auto& v : x.data) v = rng.uniform(-1.5, 1.5);
        CHECK(max_rel_error(net, x, seed + 100) < 1e-4);
    }
}

TEST_CASE("analytic gradients match finite differences, two layers") {
    Rng rng(7);
    TransformerConfig cfg = small_config();
    cfg.layers = 2;
    TransformerNet net(cfg, rng);
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    CHECK(max_rel_error(net, x, 77) < 1e-4);
}

TEST_CASE("changing an early time step changes the output (attention mixes)") {
    Rng rng(3);
    TransformerNet net(small_config(), rng);
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    const Tensor y0 = net.forward(x, Mode::Eval, rng);
    x.at(0, 0) += 0.5;  // first row; head reads the last
    const Tensor y1 = net.forward(x, Mode::Eval, rng);
    double diff = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) diff += std::abs(y0[i] - y1[i]);
    CHECK(diff > 1e-8);
}

TEST_CASE("position matters: permuting rows changes the output") {
    Rng rng(5);
    TransformerNet net(small_config(), rng);
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    Tensor xp = x;
    for (std::size_t j = 0; j < 3; ++j) std::swap(xp.at(0, j), xp.at(1, j));
    const Tensor y0 = net.forward(x, Mode::Eval, rng);
    const Tensor y1 = net.forward(xp, Mode::Eval, rng);
    double diff = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) diff += std::abs(y0[i] - y1[i]);
    CHECK(diff > 1e-8);
}

TEST_CASE("wrong sequence shape throws") {
    Rng rng(1);
    TransformerNet net(small_config(), rng);
    Tensor bad = Tensor::zeros({4, 3});
    CHECK_THROWS_AS(net.forward(bad, Mode::Eval, rng), rlt::DimensionError);
    Tensor bad2 = Tensor::zeros({5, 2});
    CHECK_THROWS_AS(net.forward(bad2, Mode::Eval, rng), rlt::DimensionError);
}

TEST_CASE("backward before forward throws") {
    Rng rng(1);
    TransformerNet net(small_config(), rng);
    Tensor g = Tensor::vector({1, 0, 0});
    CHECK_THROWS_AS(net.backward(g), rlt::StateError);
}

TEST_CASE("d_model must divide by heads") {
    Rng rng(1);
    TransformerConfig cfg = small_config();
    cfg.d_model = 7;
    CHECK_THROWS(TransformerNet(cfg, rng));
}

TEST_CASE("eval forward is deterministic even with dropout configured") {
    Rng rng(9);
    TransformerConfig cfg = small_config();
    cfg.dropout = 0.2;
    TransformerNet net(cfg, rng);
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    const Tensor a = net.forward(x, Mode::Eval, rng);
    const Tensor b = net.forward(x, Mode::Eval, rng);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("clone reproduces outputs and detaches parameters") {
    Rng rng(11);
    TransformerNet net(small_config(), rng);
    auto copy = net.clone();
    Tensor x = Tensor::zeros({5, 3});
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    const Tensor a = net.forward(x, Mode::Eval, rng);
    const Tensor b = copy->forward(x, Mode::Eval, rng);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    net.params().param("head.W").fill(0.0);
    const Tensor c = copy->forward(x, Mode::Eval, rng);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == c[i]);
}

TEST_CASE("architecture tag is set for observation encoding dispatch") {
    Rng rng(1);
    TransformerNet net(small_config(), rng);
    CHECK(net.params().architecture == "transformer");
}
