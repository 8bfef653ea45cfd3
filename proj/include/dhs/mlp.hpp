#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhs {

enum class Activation { Relu, Tanh };

const char *activation_name(Activation a);
Activation parse_activation(const std::string &name);

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/*
  Fully connected network: input -> hidden layers (activation) -> linear
  output. All weights and biases live in one flat parameter vector, layer by
  layer, each layer storing its out x in weight matrix (row-major) followed
  by its bias vector. Gradients use the same layout.
*/
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_sizes, Activation activation = Activation::Relu);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    void initialize(std::mt19937_64 &rng);

    const std::vector<std::size_t> &layer_sizes() const { return sizes_; }
    Activation activation() const { return activation_; }
    std::size_t num_layers() const { return sizes_.size() - 1; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t num_params() const { return params_.size(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    /// Offset of layer l's weights in the flat vector; biases follow at
    /// weight_offset(l) + out*in.
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + sizes_[layer + 1] * sizes_[layer]; }

    std::vector<double> forward(std::span<const double> x) const;
    /// Forward pass keeping the activations of every layer (input included).
    void forward_cached(std::span<const double> x, std::vector<std::vector<double>> &activations) const;

    friend bool operator==(const Mlp &, const Mlp &) = default;

private:
    std::vector<std::size_t> sizes_;
    Activation activation_ = Activation::Relu;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/// One temporal-difference regression sample: push Q(input, action) towards target.
struct TdSample {
    std::span<const double> input;
    std::size_t action;
    double target;
};

/// 1/2 * mean over the batch of (Q(input, action) - target)^2.
double td_loss(const Mlp &net, std::span<const TdSample> batch);

/// Exact gradient of td_loss, written into grad (size num_params). Serial
/// reference kernel.
void td_gradients_serial(const Mlp &net, std::span<const TdSample> batch, std::span<double> grad);
/// Same gradient with the per-sample backward passes run under OpenMP. The
/// per-sample contributions are summed in batch order, so the result is
/// bit-identical to the serial kernel.
void td_gradients_parallel(const Mlp &net, std::span<const TdSample> batch, std::span<double> grad);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction.
class Adam {
public:
    Adam() = default;
    Adam(std::size_t num_params, AdamConfig config = {});

    void step(std::span<double> params, std::span<const double> grad);

    std::size_t steps() const { return t_; }
    const std::vector<double> &first_moment() const { return m_; }
    const std::vector<double> &second_moment() const { return v_; }
    const AdamConfig &config() const { return config_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

}  // namespace dhs
