#pragma once

#include <optional>
#include <vector>

#include "rlt/agent.hpp"
#include "rlt/params.hpp"

namespace rlt {

struct PPOConfig {
    double gamma = 0.75;
    double lambda = 0.95;
    double clip_eps = 0.2;  // (0, 0.5)
    std::size_t epochs = 4;
    std::size_t minibatch = 64;
    std::size_t horizon = 512;  // rollout length per update
    double value_coef = 0.5;
    double entropy_coef = 0.0;
    bool normalize_advantage = true;
    double learning_rate = 1e-4;
    double l1 = 0.0;
    double l2 = 0.0;
};

struct PPODiagnostics {
    double policy_loss = 0.0;
    double critic_loss = 0.0;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
    std::size_t samples = 0;
};

// R = exp(new - old)
inline double ppo_ratio(double new_log_prob, double old_log_prob) {
    return std::exp(new_log_prob - old_log_prob);
}

// min(R*A, clip(R, 1-eps, 1+eps)*A)
inline double ppo_clip_objective(double ratio, double advantage, double eps) {
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    return std::min(ratio * advantage, clipped * advantage);
}

// mean squared error between value predictions and targets
double critic_loss(const std::vector<double>& values, const std::vector<double>& targets);

// numerically stable softmax over logits
std::vector<double> softmax(const Tensor& logits);

struct PPOSample {
    Observation state;
    int action = 0;
    double reward = 0.0;
    double log_prob = 0.0;  // under the collecting policy
    double value = 0.0;     // critic estimate at collection time
    bool terminal = false;
};

// Clipped-surrogate PPO with GAE; actor emits 3 logits, critic a scalar.
class PPOAgent : public Agent {
public:
    PPOAgent(std::unique_ptr<Network> actor, std::unique_ptr<Network> critic, PPOConfig cfg);

    struct ActResult {
        int action;
        double log_prob;
        double value;
    };
    ActResult act(const Observation& obs, Mode mode, Rng& rng);
    Position act_eval(const Observation& obs) override {
        Rng unused(0);
        return static_cast<Position>(act(obs, Mode::Eval, unused).action);
    }

    // One full PPO update over a collected rollout. `bootstrap_value` is the
    // critic estimate past the final sample (0 when it ended terminal).
    PPODiagnostics update(const std::vector<PPOSample>& rollout, double bootstrap_value, Rng& rng);

    void train_episode(TradingEnv& env, Rng& rng) override;

    std::unique_ptr<FrozenPolicy> snapshot() const override;
    nlohmann::json checkpoint() const override;
    std::string kind() const override { return "ppo"; }

    Network& actor() { return *actor_; }
    Network& critic() { return *critic_; }
    const PPOConfig& config() const { return cfg_; }
    const std::vector<PPODiagnostics>& history() const { return history_; }

private:
    PPOConfig cfg_;
    std::unique_ptr<Network> actor_;
    std::unique_ptr<Network> critic_;
    AdamState actor_opt_;
    AdamState critic_opt_;
    std::vector<PPOSample> pending_;
    std::vector<PPODiagnostics> history_;

    double value_of(const Observation& obs);
};

}  // namespace rlt
