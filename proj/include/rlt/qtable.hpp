#pragma once

#include <map>
#include <utility>

#include "rlt/rl.hpp"

namespace rlt {

// Tabular Q-learning; entries default to 0. Used as a correctness oracle
// for the function-approximation agents.
class QTable {
public:
    QTable(int num_actions, double alpha, double gamma)
        : num_actions_(num_actions), alpha_(alpha), gamma_(gamma) {}

    double q(int state, int action) const {
        auto it = table_.find({state, action});
        return it == table_.end() ? 0.0 : it->second;
    }

    // Q(s,a) += alpha * [r + gamma * max_a' Q(s',a') - Q(s,a)]
    void update(const TabularTransition& t) {
        const double bootstrap = t.terminal ? 0.0 : max_q(t.next_state);
        double& q_sa = table_[{t.state, t.action}];
        q_sa += alpha_ * (t.reward + gamma_ * bootstrap - q_sa);
    }

    double max_q(int state) const {
        double best = q(state, 0);
        for (int a = 1; a < num_actions_; ++a) best = std::max(best, q(state, a));
        return best;
    }

    // lowest index wins ties
    int greedy_action(int state) const {
        int best = 0;
        double best_q = q(state, 0);
        for (int a = 1; a < num_actions_; ++a)
            if (q(state, a) > best_q) {
                best_q = q(state, a);
                best = a;
            }
        return best;
    }

    int num_actions() const { return num_actions_; }

private:
    int num_actions_;
    double alpha_;
    double gamma_;
    std::map<std::pair<int, int>, double> table_;
};

}  // namespace rlt
