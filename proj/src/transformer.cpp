#include "rlt/transformer.hpp"

#include <cmath>
#include <stdexcept>

namespace rlt {

namespace {

constexpr double kLnEps = 1e-10;

// y = gain * (x - mean)/sqrt(var + eps) + bias, row-wise
void layer_norm_forward(const Tensor& x, const Tensor& gain, const Tensor& bias, Tensor& y,
                        Tensor& xhat, Tensor& inv_std) {
    const std::size_t rows = x.rows(), d = x.cols();
    y = Tensor::zeros({rows, d});
    xhat = Tensor::zeros({rows, d});
    inv_std = Tensor::zeros({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += x.at(i, j);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x.at(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double is = 1.0 / std::sqrt(var + kLnEps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < d; ++j) {
            const double xh = (x.at(i, j) - mean) * is;
            xhat.at(i, j) = xh;
            y.at(i, j) = gain[j] * xh + bias[j];
        }
    }
}

void layer_norm_backward(const Tensor& dy, const Tensor& gain, const Tensor& xhat,
                         const Tensor& inv_std, Tensor& dx, Tensor& dgain, Tensor& dbias) {
    const std::size_t rows = dy.rows(), d = dy.cols();
    dx = Tensor::zeros({rows, d});
    for (std::size_t i = 0; i < rows; ++i) {
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double g = dy.at(i, j);
            dgain[j] += g * xhat.at(i, j);
            dbias[j] += g;
            const double dxh = g * gain[j];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xhat.at(i, j);
        }
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double dxh = dy.at(i, j) * gain[j];
            dx.at(i, j) = inv_std[i] * (dxh - mean_dxhat - xhat.at(i, j) * mean_dxhat_xhat);
        }
    }
}

Tensor dropout_mask(std::vector<std::size_t> shape, double rate, Rng& rng) {
    Tensor mask = Tensor::zeros(std::move(shape));
    const double keep = 1.0 - rate;
    for (double& v : mask.data) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mask;
}

}  // namespace

TransformerNet::TransformerNet(TransformerConfig cfg, Rng& init_rng) : cfg_(std::move(cfg)) {
    if (cfg_.d_model % cfg_.heads != 0)
        throw std::invalid_argument("d_model must be divisible by heads");
    if (cfg_.layers < 1) throw std::invalid_argument("need at least one encoder layer");
    if (cfg_.dropout < 0.0 || cfg_.dropout >= 1.0)
        throw std::invalid_argument("dropout must be in [0,1)");
    params_.architecture = "transformer";

    auto init = [&](std::size_t r, std::size_t c) {
        Tensor w = Tensor::zeros({r, c});
        const double bound = std::sqrt(6.0 / static_cast<double>(r + c));
        for (double& v : w.data) v = init_rng.uniform(-bound, bound);
        return w;
    };
    const std::size_t d = cfg_.d_model, ff = cfg_.ff_dim;

    params_.add("in.W", init(cfg_.input_dim, d));
    params_.add("in.b", Tensor::zeros({d}));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        const std::string p = "enc" + std::to_string(l) + ".";
        for (const char* name : {"Wq", "Wk", "Wv", "Wo"}) params_.add(p + name, init(d, d));
        for (const char* name : {"bq", "bk", "bv", "bo"}) params_.add(p + name, Tensor::zeros({d}));
        Tensor ones = Tensor::zeros({d});
        ones.fill(1.0);
        params_.add(p + "ln1.g", ones);
        params_.add(p + "ln1.b", Tensor::zeros({d}));
        params_.add(p + "ff.W1", init(d, ff));
        params_.add(p + "ff.b1", Tensor::zeros({ff}));
        params_.add(p + "ff.W2", init(ff, d));
        params_.add(p + "ff.b2", Tensor::zeros({d}));
        Tensor ones2 = Tensor::zeros({d});
        ones2.fill(1.0);
        params_.add(p + "ln2.g", ones2);
        params_.add(p + "ln2.b", Tensor::zeros({d}));
    }
    params_.add("head.W", init(d, cfg_.output_dim));
    params_.add("head.b", Tensor::zeros({cfg_.output_dim}));

    // fixed sinusoidal positions
    pos_encoding_ = Tensor::zeros({cfg_.seq_len, d});
    for (std::size_t t = 0; t < cfg_.seq_len; ++t)
        for (std::size_t j = 0; j < d; ++j) {
            const double expo = static_cast<double>(2 * (j / 2)) / static_cast<double>(d);
            const double angle = static_cast<double>(t) / std::pow(10000.0, expo);
            pos_encoding_.at(t, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    cache_.resize(cfg_.layers);
}

Tensor TransformerNet::forward(const Tensor& input, Mode mode, Rng& rng) {
    if (input.rank() != 2 || input.rows() != cfg_.seq_len || input.cols() != cfg_.input_dim)
        throw DimensionError("transformer forward: expected " + std::to_string(cfg_.seq_len) +
                             "x" + std::to_string(cfg_.input_dim) + " sequence");
    const bool record = mode == Mode::Train;
    const std::size_t T = cfg_.seq_len, d = cfg_.d_model, nh = cfg_.heads, dk = head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const bool drop = mode == Mode::Train && cfg_.dropout > 0.0;

    if (record) input_cache_ = input;
    Tensor x = matmul(input, params_.param("in.W"));
    add_row_inplace(x, params_.param("in.b"));
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] += pos_encoding_.data[i];

    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        const std::string p = "enc" + std::to_string(l) + ".";
        LayerCache& c = cache_[l];
        if (record) c.x_in = x;

        Tensor q = matmul(x, params_.param(p + "Wq"));
        add_row_inplace(q, params_.param(p + "bq"));
        Tensor k = matmul(x, params_.param(p + "Wk"));
        add_row_inplace(k, params_.param(p + "bk"));
        Tensor v = matmul(x, params_.param(p + "Wv"));
        add_row_inplace(v, params_.param(p + "bv"));

        Tensor concat = Tensor::zeros({T, d});
        if (record) c.softmax.assign(nh, Tensor());
        for (std::size_t h = 0; h < nh; ++h) {
            const std::size_t off = h * dk;
            // scores and row-wise softmax
            Tensor sm = Tensor::zeros({T, T});
            for (std::size_t i = 0; i < T; ++i) {
                double maxs = -1e300;
                for (std::size_t j = 0; j < T; ++j) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < dk; ++a)
                        s += q.at(i, off + a) * k.at(j, off + a);
                    s *= scale;
                    sm.at(i, j) = s;
                    if (s > maxs) maxs = s;
                }
                double z = 0.0;
                for (std::size_t j = 0; j < T; ++j) {
                    sm.at(i, j) = std::exp(sm.at(i, j) - maxs);
                    z += sm.at(i, j);
                }
                for (std::size_t j = 0; j < T; ++j) sm.at(i, j) /= z;
            }
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j) {
                    const double w = sm.at(i, j);
                    for (std::size_t a = 0; a < dk; ++a)
                        concat.at(i, off + a) += w * v.at(j, off + a);
                }
            if (record) c.softmax[h] = std::move(sm);
        }
        if (record) {
            c.q = std::move(q);
            c.k = std::move(k);
            c.v = std::move(v);
            c.concat = concat;
        }

        Tensor attn = matmul(concat, params_.param(p + "Wo"));
        add_row_inplace(attn, params_.param(p + "bo"));
        if (drop) {
            Tensor mask = dropout_mask({T, d}, cfg_.dropout, rng);
            for (std::size_t i = 0; i < attn.size(); ++i) attn.data[i] *= mask.data[i];
            if (record) c.attn_drop_mask = std::move(mask);
        } else if (record) {
            c.attn_drop_mask = Tensor();
        }

        Tensor res1 = x;
        for (std::size_t i = 0; i < res1.size(); ++i) res1.data[i] += attn.data[i];
        Tensor x_mid, xhat1, inv1;
        layer_norm_forward(res1, params_.param(p + "ln1.g"), params_.param(p + "ln1.b"), x_mid,
                           xhat1, inv1);
        if (record) {
            c.ln1_xhat = std::move(xhat1);
            c.ln1_inv_std = std::move(inv1);
            c.x_mid = x_mid;
        }

        Tensor ff_pre = matmul(x_mid, params_.param(p + "ff.W1"));
        add_row_inplace(ff_pre, params_.param(p + "ff.b1"));
        Tensor ff_act = ff_pre;
        for (double& vv : ff_act.data) vv = vv > 0.0 ? vv : 0.0;
        if (record) c.ff_pre = std::move(ff_pre);
        Tensor ff_out = matmul(ff_act, params_.param(p + "ff.W2"));
        add_row_inplace(ff_out, params_.param(p + "ff.b2"));
        if (drop) {
            Tensor mask = dropout_mask({T, d}, cfg_.dropout, rng);
            for (std::size_t i = 0; i < ff_out.size(); ++i) ff_out.data[i] *= mask.data[i];
            if (record) c.ff_drop_mask = std::move(mask);
        } else if (record) {
            c.ff_drop_mask = Tensor();
        }

        Tensor res2 = x_mid;
        for (std::size_t i = 0; i < res2.size(); ++i) res2.data[i] += ff_out.data[i];
        Tensor x_out, xhat2, inv2;
        layer_norm_forward(res2, params_.param(p + "ln2.g"), params_.param(p + "ln2.b"), x_out,
                           xhat2, inv2);
        if (record) {
            c.ln2_xhat = std::move(xhat2);
            c.ln2_inv_std = std::move(inv2);
            c.x_out = x_out;
        }
        x = std::move(x_out);
    }

    // head reads the last time step
    const Tensor& hw = params_.param("head.W");
    const Tensor& hb = params_.param("head.b");
    Tensor out = Tensor::zeros({cfg_.output_dim});
    for (std::size_t j = 0; j < cfg_.output_dim; ++j) {
        double s = hb[j];
        for (std::size_t a = 0; a < d; ++a) s += x.at(T - 1, a) * hw.at(a, j);
        out[j] = s;
    }
    forward_recorded_ = record;
    return out;
}

void TransformerNet::backward(const Tensor& output_grad) {
    if (!forward_recorded_) throw StateError("transformer backward without a train-mode forward");
    if (output_grad.size() != cfg_.output_dim)
        throw DimensionError("transformer backward: head gradient size mismatch");
    const std::size_t T = cfg_.seq_len, d = cfg_.d_model, nh = cfg_.heads, dk = head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    const Tensor& last = cache_.back().x_out;
    Tensor& hwg = params_.grad("head.W");
    Tensor& hbg = params_.grad("head.b");
    Tensor dx = Tensor::zeros({T, d});
    const Tensor& hw = params_.param("head.W");
    for (std::size_t j = 0; j < cfg_.output_dim; ++j) {
        const double g = output_grad[j];
        hbg[j] += g;
        for (std::size_t a = 0; a < d; ++a) {
            hwg.at(a, j) += last.at(T - 1, a) * g;
            dx.at(T - 1, a) += hw.at(a, j) * g;
        }
    }

    for (std::size_t l = cfg_.layers; l-- > 0;) {
        const std::string p = "enc" + std::to_string(l) + ".";
        LayerCache& c = cache_[l];

        // LN2
        Tensor dres2;
        layer_norm_backward(dx, params_.param(p + "ln2.g"), c.ln2_xhat, c.ln2_inv_std, dres2,
                            params_.grad(p + "ln2.g"), params_.grad(p + "ln2.b"));
        // residual: dres2 flows to x_mid and to ff_out
        Tensor dff_out = dres2;
        if (c.ff_drop_mask.size() > 0)
            for (std::size_t i = 0; i < dff_out.size(); ++i)
                dff_out.data[i] *= c.ff_drop_mask.data[i];

        // FFN backward
        Tensor ff_act = c.ff_pre;
        for (double& vv : ff_act.data) vv = vv > 0.0 ? vv : 0.0;
        axpy(params_.grad(p + "ff.W2"), 1.0, matmul_tn(ff_act, dff_out));
        {
            Tensor& bg = params_.grad(p + "ff.b2");
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < d; ++j) bg[j] += dff_out.at(i, j);
        }
        Tensor dff_act = matmul_nt(dff_out, params_.param(p + "ff.W2"));
        for (std::size_t i = 0; i < dff_act.size(); ++i)
            if (c.ff_pre.data[i] <= 0.0) dff_act.data[i] = 0.0;
        axpy(params_.grad(p + "ff.W1"), 1.0, matmul_tn(c.x_mid, dff_act));
        {
            Tensor& bg = params_.grad(p + "ff.b1");
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < cfg_.ff_dim; ++j) bg[j] += dff_act.at(i, j);
        }
        Tensor dx_mid = matmul_nt(dff_act, params_.param(p + "ff.W1"));
        for (std::size_t i = 0; i < dx_mid.size(); ++i) dx_mid.data[i] += dres2.data[i];

        // LN1
        Tensor dres1;
        layer_norm_backward(dx_mid, params_.param(p + "ln1.g"), c.ln1_xhat, c.ln1_inv_std, dres1,
                            params_.grad(p + "ln1.g"), params_.grad(p + "ln1.b"));
        Tensor dattn = dres1;
        if (c.attn_drop_mask.size() > 0)
            for (std::size_t i = 0; i < dattn.size(); ++i)
                dattn.data[i] *= c.attn_drop_mask.data[i];

        // output projection
        axpy(params_.grad(p + "Wo"), 1.0, matmul_tn(c.concat, dattn));
        {
            Tensor& bg = params_.grad(p + "bo");
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < d; ++j) bg[j] += dattn.at(i, j);
        }
        Tensor dconcat = matmul_nt(dattn, params_.param(p + "Wo"));

        Tensor dq = Tensor::zeros({T, d});
        Tensor dkk = Tensor::zeros({T, d});
        Tensor dv = Tensor::zeros({T, d});
        for (std::size_t h = 0; h < nh; ++h) {
            const std::size_t off = h * dk;
            const Tensor& sm = c.softmax[h];
            // dV and dS
            Tensor ds = Tensor::zeros({T, T});
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < dk; ++a)
                        s += dconcat.at(i, off + a) * c.v.at(j, off + a);
                    ds.at(i, j) = s;
                    const double w = sm.at(i, j);
                    for (std::size_t a = 0; a < dk; ++a)
                        dv.at(j, off + a) += w * dconcat.at(i, off + a);
                }
            // softmax backward row-wise
            for (std::size_t i = 0; i < T; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < T; ++j) dot += ds.at(i, j) * sm.at(i, j);
                for (std::size_t j = 0; j < T; ++j)
                    ds.at(i, j) = sm.at(i, j) * (ds.at(i, j) - dot);
            }
            // dQ, dK
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j) {
                    const double z = ds.at(i, j) * scale;
                    if (z == 0.0) continue;
                    for (std::size_t a = 0; a < dk; ++a) {
                        dq.at(i, off + a) += z * c.k.at(j, off + a);
                        dkk.at(j, off + a) += z * c.q.at(i, off + a);
                    }
                }
        }

        Tensor dx_in = dres1;  // residual branch
        axpy(params_.grad(p + "Wq"), 1.0, matmul_tn(c.x_in, dq));
        axpy(params_.grad(p + "Wk"), 1.0, matmul_tn(c.x_in, dkk));
        axpy(params_.grad(p + "Wv"), 1.0, matmul_tn(c.x_in, dv));
        Tensor& bqg = params_.grad(p + "bq");
        Tensor& bkg = params_.grad(p + "bk");
        Tensor& bvg = params_.grad(p + "bv");
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                bqg[j] += dq.at(i, j);
                bkg[j] += dkk.at(i, j);
                bvg[j] += dv.at(i, j);
            }
        Tensor tmp = matmul_nt(dq, params_.param(p + "Wq"));
        axpy(dx_in, 1.0, tmp);
        tmp = matmul_nt(dkk, params_.param(p + "Wk"));
        axpy(dx_in, 1.0, tmp);
        tmp = matmul_nt(dv, params_.param(p + "Wv"));
        axpy(dx_in, 1.0, tmp);
        dx = std::move(dx_in);
    }

    // input projection
    axpy(params_.grad("in.W"), 1.0, matmul_tn(input_cache_, dx));
    Tensor& bg = params_.grad("in.b");
    for (std::size_t i = 0; i < T; ++i)
        for (std::size_t j = 0; j < d; ++j) bg[j] += dx.at(i, j);
}

std::unique_ptr<Network> TransformerNet::clone() const {
    Rng dummy(0);
    auto copy = std::make_unique<TransformerNet>(cfg_, dummy);
    copy->params_.copy_values_from(params_);
    return copy;
}

}  // namespace rlt
