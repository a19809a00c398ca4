#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace rlt {

// One environment transition in a tabular or function-approximation setting.
struct TabularTransition {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    bool terminal = false;
};

// Per-step value estimates carry one extra bootstrap entry for the final
// state (0 when the episode terminates there).
struct ValuedTrajectory {
    std::vector<double> rewards;
    std::vector<bool> terminals;
    std::vector<double> values;  // size rewards.size() + 1

    std::size_t length() const { return rewards.size(); }
    void check() const {
        if (values.size() != rewards.size() + 1 || terminals.size() != rewards.size())
            throw std::invalid_argument("trajectory: values must have length rewards + 1");
    }
};

enum class TraceMode { Accumulating, Replacing };

// delta = r + gamma * V(s') * (1 - terminal) - V(s)
inline double td0_error(double r_next, double v_s, double v_s_next, double gamma, bool terminal) {
    return r_next + (terminal ? 0.0 : gamma * v_s_next) - v_s;
}

inline double td0_update(double v_s, double delta, double alpha) { return v_s + alpha * delta; }

// Backward-view TD(lambda) over one tabular episode. Traces decay by
// gamma*lambda per step; every traced state moves by alpha*delta*Z.
void td_lambda_episode(const std::vector<TabularTransition>& episode,
                       std::map<int, double>& values, double gamma, double lambda, double alpha,
                       TraceMode mode = TraceMode::Accumulating);

inline double advantage(double q_sa, double v_s) { return q_sa - v_s; }

// A_t = sum_{k>=t} (gamma*lambda)^(k-t) delta_k via the backward recursion
// A_t = delta_t + gamma*lambda*A_{t+1}, cut at terminals.
std::vector<double> gae(const ValuedTrajectory& traj, double gamma, double lambda);

// G_t = r_{t+1} + gamma*G_{t+1}; tail bootstraps from `bootstrap` unless the
// step is terminal.
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<bool>& terminals, double gamma,
                                       double bootstrap);

}  // namespace rlt
