#include "rlt/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rlt/rl.hpp"
#include "rlt/serialize.hpp"

namespace rlt {

double critic_loss(const std::vector<double>& values, const std::vector<double>& targets) {
    if (values.size() != targets.size())
        throw std::invalid_argument("critic_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - targets[i];
        s += d * d;
    }
    return s / static_cast<double>(values.size());
}

std::vector<double> softmax(const Tensor& logits) {
    double m = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) m = std::max(m, logits.data[i]);
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits.data[i] - m);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

PPOAgent::PPOAgent(std::unique_ptr<Network> actor, std::unique_ptr<Network> critic, PPOConfig cfg)
    : cfg_(cfg),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      actor_opt_(cfg.learning_rate),
      critic_opt_(cfg.learning_rate) {
    if (cfg_.clip_eps <= 0.0 || cfg_.clip_eps >= 0.5)
        throw std::invalid_argument("ppo: clip epsilon must lie in (0, 0.5)");
    if (critic_->output_width() != 1)
        throw std::invalid_argument("ppo: critic must have a scalar head");
}

double PPOAgent::value_of(const Observation& obs) {
    Rng unused(0);
    return critic_->forward(encode_for(*critic_, obs), Mode::Eval, unused)[0];
}

PPOAgent::ActResult PPOAgent::act(const Observation& obs, Mode mode, Rng& rng) {
    Rng unused(0);
    const Tensor logits = actor_->forward(encode_for(*actor_, obs), Mode::Eval, unused);
    const std::vector<double> p = softmax(logits);
    int action = 0;
    if (mode == Mode::Eval) {
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[static_cast<std::size_t>(action)]) action = static_cast<int>(i);
    } else {
        const double u = rng.uniform();
        double acc = 0.0;
        action = static_cast<int>(p.size()) - 1;
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc += p[i];
            if (u < acc) {
                action = static_cast<int>(i);
                break;
            }
        }
    }
    return {action, std::log(p[static_cast<std::size_t>(action)]), value_of(obs)};
}

PPODiagnostics PPOAgent::update(const std::vector<PPOSample>& rollout, double bootstrap_value,
                                Rng& rng) {
    const std::size_t n = rollout.size();
    if (n < cfg_.minibatch) throw std::invalid_argument("ppo update: rollout below one minibatch");

    // advantages and return targets against the pre-update critic
    ValuedTrajectory traj;
    traj.rewards.reserve(n);
    traj.terminals.reserve(n);
    traj.values.reserve(n + 1);
    for (const auto& s : rollout) {
        traj.rewards.push_back(s.reward);
        traj.terminals.push_back(s.terminal);
        traj.values.push_back(s.value);
    }
    traj.values.push_back(rollout.back().terminal ? 0.0 : bootstrap_value);
    std::vector<double> adv = gae(traj, cfg_.gamma, cfg_.lambda);
    std::vector<double> returns(n);
    for (std::size_t i = 0; i < n; ++i) returns[i] = adv[i] + rollout[i].value;

    if (cfg_.normalize_advantage) {
        double m = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double a : adv) ss += (a - m) * (a - m);
        const double sd = std::sqrt(ss / static_cast<double>(n)) + 1e-8;
        for (double& a : adv) a = (a - m) / sd;
    }

    PPODiagnostics diag;
    diag.samples = n;
    Rng unused(0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double last_policy_loss = 0.0, last_critic_loss = 0.0;
    double ratio_sum = 0.0;
    std::size_t ratio_count = 0, clipped_count = 0;

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        // seeded shuffle
        for (std::size_t i = n; i-- > 1;) {
            const std::size_t j = rng.below(i + 1);
            std::swap(order[i], order[j]);
        }
        for (std::size_t start = 0; start + cfg_.minibatch <= n; start += cfg_.minibatch) {
            const std::size_t bs = cfg_.minibatch;
            const double inv_b = 1.0 / static_cast<double>(bs);
            actor_->zero_grad();
            critic_->zero_grad();
            double policy_loss = 0.0, value_loss = 0.0;
            for (std::size_t b = 0; b < bs; ++b) {
                const PPOSample& s = rollout[order[start + b]];
                const double a_hat = adv[order[start + b]];
                const double g_target = returns[order[start + b]];

                const Tensor logits =
                    actor_->forward(encode_for(*actor_, s.state), Mode::Train, unused);
                const std::vector<double> p = softmax(logits);
                const std::size_t a = static_cast<std::size_t>(s.action);
                const double new_lp = std::log(p[a]);
                const double ratio = ppo_ratio(new_lp, s.log_prob);
                policy_loss -= ppo_clip_objective(ratio, a_hat, cfg_.clip_eps) * inv_b;
                ratio_sum += ratio;
                ++ratio_count;
                const bool clipped_out = (ratio > 1.0 + cfg_.clip_eps && a_hat > 0.0) ||
                                         (ratio < 1.0 - cfg_.clip_eps && a_hat < 0.0);
                if (ratio < 1.0 - cfg_.clip_eps || ratio > 1.0 + cfg_.clip_eps) ++clipped_count;

                // d(-objective)/d logits; the clipped-out branch is constant
                Tensor glogits = Tensor::zeros({logits.size()});
                if (!clipped_out) {
                    const double dlp = -ratio * a_hat * inv_b;
                    for (std::size_t k = 0; k < p.size(); ++k)
                        glogits[k] = dlp * ((k == a ? 1.0 : 0.0) - p[k]);
                }
                if (cfg_.entropy_coef > 0.0) {
                    double h = 0.0;
                    for (double pk : p)
                        if (pk > 0.0) h -= pk * std::log(pk);
                    for (std::size_t k = 0; k < p.size(); ++k)
                        glogits[k] += cfg_.entropy_coef * inv_b * p[k] * (std::log(p[k]) + h);
                }
                actor_->backward(glogits);

                const Tensor v =
                    critic_->forward(encode_for(*critic_, s.state), Mode::Train, unused);
                const double err = v[0] - g_target;
                value_loss += err * err * inv_b;
                Tensor gv = Tensor::zeros({1});
                gv[0] = cfg_.value_coef * 2.0 * err * inv_b;
                critic_->backward(gv);
            }
            policy_loss += regularization_penalty(actor_->params(), cfg_.l1, cfg_.l2);
            value_loss += regularization_penalty(critic_->params(), cfg_.l1, cfg_.l2);
            actor_opt_.step(actor_->params());
            critic_opt_.step(critic_->params());
            last_policy_loss = policy_loss;
            last_critic_loss = value_loss;
        }
    }
    diag.policy_loss = last_policy_loss;
    diag.critic_loss = last_critic_loss;
    diag.mean_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 1.0;
    diag.clip_fraction =
        ratio_count ? static_cast<double>(clipped_count) / static_cast<double>(ratio_count) : 0.0;
    history_.push_back(diag);
    return diag;
}

void PPOAgent::train_episode(TradingEnv& env, Rng& rng) {
    Observation obs = env.reset();
    while (!env.done()) {
        const ActResult a = act(obs, Mode::Train, rng);
        const StepResult r = env.step(static_cast<Position>(a.action));
        PPOSample s;
        s.state = obs;
        s.action = a.action;
        s.reward = r.reward;
        s.log_prob = a.log_prob;
        s.value = a.value;
        s.terminal = r.done;
        pending_.push_back(std::move(s));
        if (!r.done) obs = r.observation;
        if (pending_.size() >= cfg_.horizon) {
            const double boot = (pending_.back().terminal || r.done) ? 0.0 : value_of(obs);
            update(pending_, boot, rng);
            pending_.clear();
        }
    }
    // flush whatever is left if it still fills a minibatch
    if (pending_.size() >= cfg_.minibatch) {
        update(pending_, 0.0, rng);
        pending_.clear();
    }
}

namespace {

class PPOPolicy : public FrozenPolicy {
public:
    explicit PPOPolicy(std::unique_ptr<Network> actor) : actor_(std::move(actor)) {}
    Position act(const Observation& obs) const override {
        Rng unused(0);
        const Tensor logits = actor_->forward(encode_for(*actor_, obs), Mode::Eval, unused);
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.size(); ++i)
            if (logits.data[i] > logits.data[best]) best = i;
        return static_cast<Position>(best);
    }

private:
    mutable std::unique_ptr<Network> actor_;
};

}  // namespace

std::unique_ptr<FrozenPolicy> PPOAgent::snapshot() const {
    return std::make_unique<PPOPolicy>(actor_->clone());
}

nlohmann::json PPOAgent::checkpoint() const {
    nlohmann::json j;
    j["kind"] = kind();
    j["actor"] = params_to_json(actor_->params());
    j["critic"] = params_to_json(critic_->params());
    return j;
}

}  // namespace rlt
