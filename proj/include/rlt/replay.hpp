#pragma once

#include <vector>

#include "rlt/env.hpp"
#include "rlt/rng.hpp"
#include "rlt/tensor.hpp"

namespace rlt {

// One experience tuple as the DDQN consumes it (encoded observations).
struct Transition {
    Observation state;
    int action = 0;
    double reward = 0.0;
    Observation next_state;
    bool terminal = false;
};

// Fixed-capacity ring; batches are sampled without replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t) {
        if (buffer_.size() < capacity_) {
            buffer_.push_back(std::move(t));
        } else {
            buffer_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }

    std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const {
        // partial Fisher-Yates over an index vector
        std::vector<std::size_t> idx(buffer_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<const Transition*> out;
        out.reserve(batch);
        for (std::size_t i = 0; i < batch && i < idx.size(); ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
            out.push_back(&buffer_[idx[i]]);
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> buffer_;
};

}  // namespace rlt
