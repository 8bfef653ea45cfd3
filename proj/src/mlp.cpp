#include "dhs/mlp.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

using namespace std;

namespace dhs {

const char *activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "tanh";
}

Activation parse_activation(const string &name) {
    if (name == "relu")
        return Activation::Relu;
    if (name == "tanh")
        return Activation::Tanh;
    throw invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(vector<size_t> layer_sizes, Activation activation)
    : sizes_(move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2)
        throw ShapeMismatch("network needs an input and an output layer");
    size_t total = 0;
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] == 0 || sizes_[l + 1] == 0)
            throw ShapeMismatch("layer sizes must be positive");
        offsets_.push_back(total);
        total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
}

void Mlp::initialize(mt19937_64 &rng) {
    fill(params_.begin(), params_.end(), 0.0);
    for (size_t l = 0; l < num_layers(); ++l) {
        double bound = 1.0 / sqrt(static_cast<double>(sizes_[l]));
        uniform_real_distribution<double> dist(-bound, bound);
        size_t count = sizes_[l + 1] * sizes_[l];
        for (size_t i = 0; i < count; ++i)
            params_[offsets_[l] + i] = dist(rng);
    }
}

namespace {

inline double activate(Activation a, double z) {
    return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : tanh(z);
}

/// Derivative expressed through the activation output.
inline double activate_grad(Activation a, double out) {
    return a == Activation::Relu ? (out > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

}  // namespace

void Mlp::forward_cached(span<const double> x, vector<vector<double>> &acts) const {
    if (x.size() != input_size())
        throw ShapeMismatch("input of length " + to_string(x.size()) + ", network expects " +
                            to_string(input_size()));
    acts.resize(sizes_.size());
    acts[0].assign(x.begin(), x.end());
    for (size_t l = 0; l < num_layers(); ++l) {
        size_t in = sizes_[l], out = sizes_[l + 1];
        const double *w = &params_[offsets_[l]];
        const double *b = w + out * in;
        const vector<double> &a = acts[l];
        vector<double> &z = acts[l + 1];
        z.resize(out);
        bool hidden = l + 1 < num_layers();
        for (size_t i = 0; i < out; ++i) {
            const double *row = w + i * in;
            // Four partial sums let the compiler vectorize the dot product.
            double part[4] = {0.0, 0.0, 0.0, 0.0};
            size_t j = 0;
            for (; j + 4 <= in; j += 4) {
                part[0] += row[j] * a[j];
                part[1] += row[j + 1] * a[j + 1];
                part[2] += row[j + 2] * a[j + 2];
                part[3] += row[j + 3] * a[j + 3];
            }
            double sum = b[i] + ((part[0] + part[1]) + (part[2] + part[3]));
            for (; j < in; ++j)
                sum += row[j] * a[j];
            z[i] = hidden ? activate(activation_, sum) : sum;
        }
    }
}

vector<double> Mlp::forward(span<const double> x) const {
    vector<vector<double>> acts;
    forward_cached(x, acts);
    return move(acts.back());
}

double td_loss(const Mlp &net, span<const TdSample> batch) {
    if (batch.empty())
        throw ShapeMismatch("empty batch");
    double total = 0.0;
    for (const TdSample &s : batch) {
        vector<double> q = net.forward(s.input);
        double err = q.at(s.action) - s.target;
        total += 0.5 * err * err;
    }
    return total / static_cast<double>(batch.size());
}

namespace {

struct BackwardScratch {
    vector<vector<double>> acts;
    vector<double> delta;
    vector<double> delta_prev;
};

/// Adds one sample's contribution (scaled by 1/batch_size) into grad.
void accumulate_sample(const Mlp &net, const TdSample &s, double scale, span<double> grad,
                       BackwardScratch &scratch) {
    net.forward_cached(s.input, scratch.acts);
    const auto &sizes = net.layer_sizes();
    if (s.action >= net.output_size())
        throw ShapeMismatch("action " + to_string(s.action) + " out of range");
    const size_t last = net.num_layers() - 1;
    scratch.delta.assign(sizes.back(), 0.0);
    scratch.delta[s.action] = (scratch.acts.back()[s.action] - s.target) * scale;

    auto params = net.params();
    for (size_t l = last + 1; l-- > 0;) {
        size_t in = sizes[l], out = sizes[l + 1];
        const vector<double> &a = scratch.acts[l];
        double *gw = &grad[net.weight_offset(l)];
        double *gb = &grad[net.bias_offset(l)];
        for (size_t i = 0; i < out; ++i) {
            double d = scratch.delta[i];
            if (d == 0.0)
                continue;
            double *row = gw + i * in;
            for (size_t j = 0; j < in; ++j)
                row[j] += d * a[j];
            gb[i] += d;
        }
        if (l == 0)
            break;
        const double *w = &params[net.weight_offset(l)];
        scratch.delta_prev.assign(in, 0.0);
        for (size_t i = 0; i < out; ++i) {
            double d = scratch.delta[i];
            if (d == 0.0)
                continue;
            const double *row = w + i * in;
            for (size_t j = 0; j < in; ++j)
                scratch.delta_prev[j] += row[j] * d;
        }
        for (size_t j = 0; j < in; ++j)
            scratch.delta_prev[j] *= activate_grad(net.activation(), a[j]);
        swap(scratch.delta, scratch.delta_prev);
    }
}

void check_gradient_args(const Mlp &net, span<const TdSample> batch, span<double> grad) {
    if (batch.empty())
        throw ShapeMismatch("empty batch");
    if (grad.size() != net.num_params())
        throw ShapeMismatch("gradient buffer has wrong size");
}

}  // namespace

void td_gradients_serial(const Mlp &net, span<const TdSample> batch, span<double> grad) {
    check_gradient_args(net, batch, grad);
    fill(grad.begin(), grad.end(), 0.0);
    double scale = 1.0 / static_cast<double>(batch.size());
    BackwardScratch scratch;
    for (const TdSample &s : batch)
        accumulate_sample(net, s, scale, grad, scratch);
}

void td_gradients_parallel(const Mlp &net, span<const TdSample> batch, span<double> grad) {
    check_gradient_args(net, batch, grad);
    const size_t p = net.num_params();
    const long long b = static_cast<long long>(batch.size());
    double scale = 1.0 / static_cast<double>(batch.size());
    vector<double> per_sample(p * batch.size(), 0.0);

#pragma omp parallel
    {
        BackwardScratch scratch;
#pragma omp for schedule(static)
        for (long long i = 0; i < b; ++i)
            accumulate_sample(net, batch[i], scale, span<double>(&per_sample[i * p], p), scratch);
    }

    fill(grad.begin(), grad.end(), 0.0);
    for (long long i = 0; i < b; ++i) {
        const double *src = &per_sample[i * p];
        for (size_t k = 0; k < p; ++k)
            grad[k] += src[k];
    }
}

Adam::Adam(size_t num_params, AdamConfig config)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {}

void Adam::step(span<double> params, span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ShapeMismatch("adam: parameter/gradient size mismatch");
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - pow(b2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        double g = grad[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
        double m_hat = m_[i] / c1;
        double v_hat = v_[i] / c2;
        params[i] -= config_.learning_rate * m_hat / (sqrt(v_hat) + config_.epsilon);
    }
}

}  // namespace dhs
