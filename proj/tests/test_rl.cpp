#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>

#include "doctest.h"
#include "rlt/qtable.hpp"
#include "rlt/rl.hpp"
#include "rlt/rng.hpp"

using rlt::TabularTransition;
using rlt::ValuedTrajectory;

TEST_CASE("td0 error and update, hand-worked") {
    // delta = 1 + 0.9*2 - 0.5 = 2.3
    CHECK(rlt::td0_error(1.0, 0.5, 2.0, 0.9, false) == doctest::Approx(2.3).epsilon(1e-15));
    // terminal: delta = 1 - 0.5 = 0.5
    CHECK(rlt::td0_error(1.0, 0.5, 2.0, 0.9, true) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rlt::td0_update(0.5, 2.3, 0.1) == doctest::Approx(0.73).epsilon(1e-15));
}

TEST_CASE("td(0) converges on a two-state chain") {
    // s0 -> s1 (reward 0), s1 -> terminal (reward 1); gamma = 0.5
    // true V(s1) = 1, V(s0) = 0.5
    std::map<int, double> v{{0, 0.0}, {1, 0.0}};
    const double gamma = 0.5, alpha = 0.1;
    for (int ep = 0; ep < 2000; ++ep) {
        double d = rlt::td0_error(0.0, v[0], v[1], gamma, false);
        v[0] = rlt::td0_update(v[0], d, alpha);
        d = rlt::td0_error(1.0, v[1], 0.0, gamma, true);
        v[1] = rlt::td0_update(v[1], d, alpha);
    }
    CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-6));
}

// forward-view oracle: V(s_t) moves toward the lambda-return
static std::map<int, double> forward_td_lambda(const std::vector<TabularTransition>& ep,
                                               std::map<int, double> v, double gamma,
                                               double lambda, double alpha) {
    const std::size_t n = ep.size();
    std::map<int, double> out = v;
    std::map<int, double> delta_acc;  // per-state total update under frozen values
    for (std::size_t t = 0; t < n; ++t) {
        // G_t^lambda = (1-lambda) sum_{k<last} lambda^(k-t) G_t^(k-t+1)
        //              + lambda^(last-t) G_t^(last-t+1)
        double g_lambda = 0.0;
        double discounted_reward = 0.0;
        double discount = 1.0;
        for (std::size_t k = t; k < n; ++k) {
            discounted_reward += discount * ep[k].reward;
            discount *= gamma;
            const bool final_step = ep[k].terminal || k + 1 == n;
            const double bootstrap = ep[k].terminal ? 0.0 : v.at(ep[k].next_state);
            const double g_n = discounted_reward + discount * bootstrap;
            const double w = std::pow(lambda, static_cast<double>(k - t)) *
                             (final_step ? 1.0 : 1.0 - lambda);
            g_lambda += w * g_n;
            if (ep[k].terminal) break;
        }
        delta_acc[ep[t].state] += g_lambda - v.at(ep[t].state);
    }
    for (auto& [s, d] : delta_acc) out[s] += alpha * d;
    return out;
}

TEST_CASE("backward-view td(lambda) matches the forward view on distinct states") {
    // forward/backward equivalence holds exactly for offline updates when
    // each state appears once in the episode
    std::vector<TabularTransition> ep = {
        {0, 0, 1.0, 1, false},
        {1, 0, -0.5, 2, false},
        {2, 0, 2.0, 3, false},
        {3, 0, 0.25, 4, true},
    };
    std::map<int, double> v{{0, 0.1}, {1, -0.2}, {2, 0.3}, {3, 0.05}, {4, 0.0}};
    const double gamma = 0.9, lambda = 0.7, alpha = 0.5;

    std::map<int, double> backward = v;
    rlt::td_lambda_episode(ep, backward, gamma, lambda, alpha);
    const std::map<int, double> forward = forward_td_lambda(ep, v, gamma, lambda, alpha);
    for (const auto& [s, val] : forward)
        CHECK(backward.at(s) == doctest::Approx(val).epsilon(1e-12));
}

TEST_CASE("td(lambda) with lambda=0 reduces to one td(0) sweep") {
    std::vector<TabularTransition> ep = {
        {0, 0, 1.0, 1, false},
        {1, 0, 2.0, 2, true},
    };
    std::map<int, double> v{{0, 0.5}, {1, 0.25}, {2, 0.0}};
    std::map<int, double> lam = v;
    rlt::td_lambda_episode(ep, lam, 0.8, 0.0, 0.1);
    std::map<int, double> td0 = v;
    td0[0] += 0.1 * rlt::td0_error(1.0, v[0], v[1], 0.8, false);
    td0[1] += 0.1 * rlt::td0_error(2.0, v[1], v[2], 0.8, true);
    for (const auto& [s, val] : td0) CHECK(lam.at(s) == doctest::Approx(val).epsilon(1e-14));
}

TEST_CASE("td_lambda throws on a state missing from the table") {
    std::vector<TabularTransition> ep = {{7, 0, 1.0, 8, false}};
    std::map<int, double> v{{7, 0.0}};  // next state 8 missing
    CHECK_THROWS_AS(rlt::td_lambda_episode(ep, v, 0.9, 0.5, 0.1), std::out_of_range);
}

TEST_CASE("replacing traces cap repeated-state credit") {
    // state 0 visited twice before the reward; replacing <= accumulating
    std::vector<TabularTransition> ep = {
        {0, 0, 0.0, 1, false},
        {1, 0, 0.0, 0, false},
        {0, 0, 1.0, 2, true},
    };
    std::map<int, double> v{{0, 0.0}, {1, 0.0}, {2, 0.0}};
    std::map<int, double> acc = v, rep = v;
    rlt::td_lambda_episode(ep, acc, 0.9, 0.9, 0.1, rlt::TraceMode::Accumulating);
    rlt::td_lambda_episode(ep, rep, 0.9, 0.9, 0.1, rlt::TraceMode::Replacing);
    CHECK(rep.at(0) < acc.at(0));
    CHECK(rep.at(0) > 0.0);
}

// brute force: A_t = sum_k (gamma*lambda)^(k-t) * delta_k within the episode
static std::vector<double> gae_brute(const ValuedTrajectory& tr, double gamma, double lambda) {
    const std::size_t n = tr.length();
    std::vector<double> delta(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double next_v = tr.terminals[t] ? 0.0 : tr.values[t + 1];
        delta[t] = tr.rewards[t] + gamma * next_v - tr.values[t];
    }
    std::vector<double> adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double w = 1.0;
        for (std::size_t k = t; k < n; ++k) {
            adv[t] += w * delta[k];
            if (tr.terminals[k]) break;
            w *= gamma * lambda;
        }
    }
    return adv;
}

TEST_CASE("gae equals brute-force summation on random trajectories") {
    rlt::Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        ValuedTrajectory tr;
        for (std::size_t t = 0; t < n; ++t) {
            tr.rewards.push_back(rng.normal());
            tr.terminals.push_back(rng.uniform() < 0.05);
            tr.values.push_back(rng.normal());
        }
        tr.values.push_back(tr.terminals.back() ? 0.0 : rng.normal());
        const double gamma = rng.uniform(0.5, 0.999);
        const double lambda = rng.uniform(0.0, 1.0);
        const auto fast = rlt::gae(tr, gamma, lambda);
        const auto slow = gae_brute(tr, gamma, lambda);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t t = 0; t < n; ++t)
            CHECK(std::abs(fast[t] - slow[t]) < 1e-12);
    }
}

TEST_CASE("gae with lambda=1 equals discounted returns minus baseline") {
    rlt::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(100);
        ValuedTrajectory tr;
        for (std::size_t t = 0; t < n; ++t) {
            tr.rewards.push_back(rng.normal());
            tr.terminals.push_back(rng.uniform() < 0.1);
            tr.values.push_back(rng.normal());
        }
        const double bootstrap = tr.terminals.back() ? 0.0 : rng.normal();
        tr.values.push_back(bootstrap);
        const double gamma = rng.uniform(0.5, 0.999);
        const auto adv = rlt::gae(tr, gamma, 1.0);
        const auto ret = rlt::discounted_returns(tr.rewards, tr.terminals, gamma, bootstrap);
        for (std::size_t t = 0; t < n; ++t)
            CHECK(std::abs(adv[t] - (ret[t] - tr.values[t])) < 1e-10);
    }
}

TEST_CASE("gae validates the trajectory shape") {
    ValuedTrajectory tr;
    tr.rewards = {1.0};
    tr.terminals = {true};
    tr.values = {0.0};  // missing bootstrap slot
    CHECK_THROWS_AS(rlt::gae(tr, 0.9, 0.9), std::invalid_argument);
}

TEST_CASE("discounted returns, hand-worked with a terminal cut") {
    // rewards 1, 2, 3 with terminal after step 1; gamma 0.5, bootstrap 8
    const auto g = rlt::discounted_returns({1, 2, 3}, {false, true, false}, 0.5, 8.0);
    // G2 = 3 + 0.5*8 = 7; G1 = 2 (terminal); G0 = 1 + 0.5*2 = 2
    CHECK(g[2] == doctest::Approx(7.0));
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK(g[0] == doctest::Approx(2.0));
}

TEST_CASE("advantage is q minus v") { CHECK(rlt::advantage(3.0, 1.25) == 1.75); }

TEST_CASE("q-table update matches hand arithmetic") {
    rlt::QTable q(2, 0.5, 0.9);
    q.update({0, 1, 10.0, 1, false});  // Q(0,1) = 0.5*(10 + 0.9*0 - 0) = 5
    CHECK(q.q(0, 1) == doctest::Approx(5.0));
    q.update({1, 0, 2.0, 0, false});  // Q(1,0) = 0.5*(2 + 0.9*5 - 0) = 3.25
    CHECK(q.q(1, 0) == doctest::Approx(3.25));
    q.update({0, 1, 10.0, 1, true});  // terminal: Q(0,1) += 0.5*(10 - 5) = 7.5
    CHECK(q.q(0, 1) == doctest::Approx(7.5));
}

TEST_CASE("greedy action resolves ties to the lowest index") {
    rlt::QTable q(3, 0.1, 0.9);
    CHECK(q.greedy_action(42) == 0);  // all zero
    q.update({42, 2, 10.0, 0, true});
    CHECK(q.greedy_action(42) == 2);
}
