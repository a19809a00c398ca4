#pragma once

#include <memory>
#include <string>

#include "rlt/params.hpp"
#include "rlt/rng.hpp"
#include "rlt/tensor.hpp"

namespace rlt {

enum class Mode { Train, Eval };

// A differentiable function approximator with named parameters.
// forward() in Train mode records the activations backward() consumes;
// backward() accumulates into the gradient slots.
class Network {
public:
    virtual ~Network() = default;

    virtual Tensor forward(const Tensor& input, Mode mode, Rng& rng) = 0;
    virtual void backward(const Tensor& output_grad) = 0;

    virtual ParameterSet& params() = 0;
    virtual const ParameterSet& params() const = 0;

    virtual std::size_t input_width() const = 0;
    virtual std::size_t output_width() const = 0;

    virtual std::unique_ptr<Network> clone() const = 0;

    void zero_grad() { params().zero_grad(); }
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rlt
