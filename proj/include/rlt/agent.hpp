#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "rlt/env.hpp"
#include "rlt/network.hpp"

namespace rlt {

// Encode an observation for whichever architecture the net expects.
inline Tensor encode_for(const Network& net, const Observation& obs) {
    return net.params().architecture == "transformer" ? encode_sequence(obs) : encode_flat(obs);
}

// Frozen policy usable for deterministic evaluation from any thread.
class FrozenPolicy {
public:
    virtual ~FrozenPolicy() = default;
    virtual Position act(const Observation& obs) const = 0;
};

// A learning agent: trains episode-by-episode on a TradingEnv and can emit
// frozen snapshots for validation/test rollouts.
class Agent {
public:
    virtual ~Agent() = default;

    virtual Position act_eval(const Observation& obs) = 0;
    virtual void train_episode(TradingEnv& env, Rng& rng) = 0;

    virtual std::unique_ptr<FrozenPolicy> snapshot() const = 0;
    virtual nlohmann::json checkpoint() const = 0;
    virtual std::string kind() const = 0;
};

}  // namespace rlt
