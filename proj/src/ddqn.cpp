#include "rlt/ddqn.hpp"

#include <cmath>

#include "rlt/serialize.hpp"

namespace rlt {

std::size_t argmax_index(const Tensor& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v.data[i] > v.data[best]) best = i;
    return best;
}

DDQNAgent::DDQNAgent(std::unique_ptr<Network> net, DDQNConfig cfg)
    : cfg_(cfg),
      net_(std::move(net)),
      buffer_(cfg.replay_capacity),
      opt_(cfg.learning_rate) {
    target_ = net_->clone();
}

Tensor DDQNAgent::q_values(Network& net, const Observation& obs, Mode mode) {
    Rng unused(0);
    return net.forward(encode_for(net, obs), mode, unused);
}

double DDQNAgent::epsilon() const {
    if (env_steps_ >= cfg_.eps_decay_steps) return cfg_.eps_end;
    const double frac = static_cast<double>(env_steps_) / static_cast<double>(cfg_.eps_decay_steps);
    return cfg_.eps_start + frac * (cfg_.eps_end - cfg_.eps_start);
}

int DDQNAgent::act(const Observation& obs, Mode mode, Rng& rng) {
    if (mode == Mode::Train && rng.uniform() < epsilon())
        return static_cast<int>(rng.below(net_->output_width()));
    return static_cast<int>(argmax_index(q_values(*net_, obs, Mode::Eval)));
}

double DDQNAgent::target(const Transition& t) {
    if (t.terminal) return t.reward;
    const Tensor q_primary = q_values(*net_, t.next_state, Mode::Eval);
    const std::size_t a_star = argmax_index(q_primary);
    const Tensor q_target = q_values(*target_, t.next_state, Mode::Eval);
    return t.reward + cfg_.gamma * q_target[a_star];
}

double DDQNAgent::train_step_on(const std::vector<const Transition*>& batch) {
    net_->zero_grad();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    Rng unused(0);
    for (const Transition* t : batch) {
        const double y = target(*t);
        const Tensor q = net_->forward(encode_for(*net_, t->state), Mode::Train, unused);
        const double err = q[static_cast<std::size_t>(t->action)] - y;
        loss += err * err * inv_n;
        Tensor g = Tensor::zeros({q.size()});
        g[static_cast<std::size_t>(t->action)] = 2.0 * err * inv_n;
        net_->backward(g);
    }
    loss += regularization_penalty(net_->params(), cfg_.l1, cfg_.l2);
    opt_.step(net_->params());
    ++train_steps_;
    if (train_steps_ % cfg_.target_sync_period == 0) sync_target();
    return loss;
}

std::optional<double> DDQNAgent::train_step(Rng& rng) {
    if (buffer_.size() < std::max(cfg_.batch_size, cfg_.warmup_transitions)) return std::nullopt;
    return train_step_on(buffer_.sample(cfg_.batch_size, rng));
}

void DDQNAgent::sync_target() { target_->params().copy_values_from(net_->params()); }

void DDQNAgent::train_episode(TradingEnv& env, Rng& rng) {
    Observation obs = env.reset();
    while (!env.done()) {
        const int action = act(obs, Mode::Train, rng);
        const StepResult r = env.step(static_cast<Position>(action));
        Transition t;
        t.state = obs;
        t.action = action;
        t.reward = r.reward;
        t.terminal = r.done;
        t.next_state = r.done ? obs : r.observation;
        buffer_.push(std::move(t));
        ++env_steps_;
        if (env_steps_ % cfg_.train_every == 0) train_step(rng);
        if (!r.done) obs = r.observation;
    }
}

namespace {

class DDQNPolicy : public FrozenPolicy {
public:
    explicit DDQNPolicy(std::unique_ptr<Network> net) : net_(std::move(net)) {}
    Position act(const Observation& obs) const override {
        Rng unused(0);
        const Tensor q = net_->forward(encode_for(*net_, obs), Mode::Eval, unused);
        return static_cast<Position>(argmax_index(q));
    }

private:
    mutable std::unique_ptr<Network> net_;
};

}  // namespace

std::unique_ptr<FrozenPolicy> DDQNAgent::snapshot() const {
    return std::make_unique<DDQNPolicy>(net_->clone());
}

nlohmann::json DDQNAgent::checkpoint() const {
    nlohmann::json j;
    j["kind"] = kind();
    j["train_steps"] = train_steps_;
    j["env_steps"] = env_steps_;
    j["primary"] = params_to_json(net_->params());
    j["target"] = params_to_json(target_->params());
    return j;
}

}  // namespace rlt
