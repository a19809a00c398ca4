#pragma once

#include <optional>

#include "rlt/agent.hpp"
#include "rlt/params.hpp"
#include "rlt/replay.hpp"

namespace rlt {

struct DDQNConfig {
    double gamma = 0.75;
    std::size_t batch_size = 64;
    std::size_t replay_capacity = 50000;
    std::size_t warmup_transitions = 256;  // collect before the first update
    std::size_t target_sync_period = 500;  // train steps between hard syncs
    std::size_t train_every = 1;           // env steps between updates
    double eps_start = 1.0;
    double eps_end = 0.05;
    std::size_t eps_decay_steps = 10000;  // linear decay horizon (env steps)
    double learning_rate = 1e-4;
    double l1 = 0.0;
    double l2 = 0.0;
};

// Double DQN: the primary net selects the bootstrap action, the target net
// evaluates it. Hard target syncs, epsilon-greedy exploration.
class DDQNAgent : public Agent {
public:
    DDQNAgent(std::unique_ptr<Network> net, DDQNConfig cfg);

    int act(const Observation& obs, Mode mode, Rng& rng);
    Position act_eval(const Observation& obs) override {
        Rng unused(0);
        return static_cast<Position>(act(obs, Mode::Eval, unused));
    }

    // y = r + gamma * Q(s', argmax_a' Q(s',a'; theta); theta^-) * (1 - terminal)
    double target(const Transition& t);

    // One gradient step on a sampled batch; nullopt while the buffer is
    // below batch size.
    std::optional<double> train_step(Rng& rng);
    double train_step_on(const std::vector<const Transition*>& batch);

    void sync_target();
    void observe(Transition t) { buffer_.push(std::move(t)); }

    void train_episode(TradingEnv& env, Rng& rng) override;

    std::unique_ptr<FrozenPolicy> snapshot() const override;
    nlohmann::json checkpoint() const override;
    std::string kind() const override { return "ddqn"; }

    double epsilon() const;
    Network& primary() { return *net_; }
    Network& target_net() { return *target_; }
    const DDQNConfig& config() const { return cfg_; }
    std::size_t env_steps() const { return env_steps_; }
    ReplayBuffer& buffer() { return buffer_; }

private:
    DDQNConfig cfg_;
    std::unique_ptr<Network> net_;
    std::unique_ptr<Network> target_;
    ReplayBuffer buffer_;
    AdamState opt_;
    std::size_t env_steps_ = 0;
    std::size_t train_steps_ = 0;

    Tensor q_values(Network& net, const Observation& obs, Mode mode);
};

// lowest index wins ties
std::size_t argmax_index(const Tensor& v);

}  // namespace rlt
