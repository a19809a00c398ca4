#include "rlt/rl.hpp"

namespace rlt {

void td_lambda_episode(const std::vector<TabularTransition>& episode,
                       std::map<int, double>& values, double gamma, double lambda, double alpha,
                       TraceMode mode) {
    if (episode.empty()) throw std::invalid_argument("td_lambda: empty episode");
    std::map<int, double> traces;
    for (const auto& tr : episode) {
        if (!values.count(tr.state)) throw std::out_of_range("td_lambda: unknown state id");
        if (!tr.terminal && !values.count(tr.next_state))
            throw std::out_of_range("td_lambda: unknown next-state id");
        const double v_next = tr.terminal ? 0.0 : values.at(tr.next_state);
        const double delta = td0_error(tr.reward, values.at(tr.state), v_next, gamma, tr.terminal);
        if (mode == TraceMode::Accumulating)
            traces[tr.state] += 1.0;
        else
            traces[tr.state] = 1.0;
        for (auto& [s, z] : traces) values.at(s) += alpha * delta * z;
        for (auto& [s, z] : traces) z *= gamma * lambda;
    }
}

std::vector<double> gae(const ValuedTrajectory& traj, double gamma, double lambda) {
    traj.check();
    const std::size_t n = traj.length();
    std::vector<double> adv(n, 0.0);
    double acc = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const bool term = traj.terminals[t];
        const double delta =
            td0_error(traj.rewards[t], traj.values[t], traj.values[t + 1], gamma, term);
        acc = delta + (term ? 0.0 : gamma * lambda * acc);
        adv[t] = acc;
    }
    return adv;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<bool>& terminals, double gamma,
                                       double bootstrap) {
    const std::size_t n = rewards.size();
    std::vector<double> g(n, 0.0);
    double acc = bootstrap;
    for (std::size_t t = n; t-- > 0;) {
        if (terminals[t]) acc = 0.0;
        acc = rewards[t] + gamma * acc;
        g[t] = acc;
    }
    return g;
}

}  // namespace rlt
