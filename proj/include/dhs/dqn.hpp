#pragma once

#include "dhs/mlp.hpp"
#include "dhs/policy.hpp"
#include "dhs/task.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dhs {

struct Transition {
    std::vector<double> s;
    std::size_t a = 0;
    double r = -1.0;
    std::vector<double> s_next;
    bool done = false;
};

/// Fixed-capacity FIFO of transitions with a seeded uniform sampler.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(Transition tr);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// i = 0 is the oldest stored transition.
    const Transition &operator[](std::size_t i) const;
    /// k indices drawn uniformly with replacement. Throws std::logic_error
    /// when fewer than k transitions are stored.
    std::vector<std::size_t> sample_indices(std::size_t k);

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t head_ = 0;
    std::mt19937_64 rng_;
};

struct TrainConfig {
    std::vector<std::size_t> hidden = {75, 75};
    Activation activation = Activation::Relu;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    std::size_t epsilon_decay_steps = 500000;
    double gamma = 0.99;
    AdamConfig adam;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 100000;
    std::size_t warmup = 1000;
    std::size_t target_sync_interval = 1000;
    std::size_t total_updates = 1000000;
    std::size_t episode_cutoff = 7500;
    std::size_t eval_interval = 30000;
    bool normalize = false;
    /// Use the OpenMP gradient kernel (same numbers as the serial one).
    bool parallel_gradients = false;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps.
double epsilon_at(const TrainConfig &config, std::size_t update_step);

/// r if done, else r + gamma * Q_target(s', argmax_a Q_online(s', a)).
double double_dqn_target(const Mlp &online, const Mlp &target, const Transition &tr, double gamma);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> q);

/// Running per-component mean/variance (Welford) used to z-normalize inputs.
class FeatureNormalizer {
public:
    FeatureNormalizer() = default;
    explicit FeatureNormalizer(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

    void update(std::span<const double> x);
    std::vector<double> apply(std::span<const double> x) const;

    std::size_t count() const { return count_; }
    std::size_t dim() const { return mean_.size(); }
    const std::vector<double> &mean() const { return mean_; }
    std::vector<double> stddev() const;

    void restore(std::size_t count, std::vector<double> mean, std::vector<double> m2);
    const std::vector<double> &m2() const { return m2_; }

private:
    std::size_t count_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

/// Frozen Q-network plus what is needed to act with it.
struct QModel {
    Mlp net;
    std::size_t num_heuristics = 0;
    bool normalize = false;
    FeatureNormalizer normalizer;
    /// Snapshot of the training configuration, stored as JSON text.
    std::string config_json = "{}";
};

void save_model(const QModel &model, const std::string &path);
QModel load_model(const std::string &path);
std::string config_to_json(const TrainConfig &config);

/// Greedy policy over the Q-values of the current feature diff.
class QPolicy : public ControlPolicy {
public:
    QPolicy(QModel model, std::string spec);

    void begin_episode(std::size_t n) override;
    std::size_t select(const StepView &step) override;
    std::string spec() const override { return spec_; }
    const QModel &model() const { return model_; }

private:
    QModel model_;
    std::string spec_;
};

struct EvalPoint {
    std::size_t update_step;
    std::size_t solved;
    std::size_t instances;
    std::size_t total_expansions;
};

struct TrainResult {
    QModel incumbent;
    std::vector<EvalPoint> curve;
    std::size_t updates = 0;
    std::size_t episodes = 0;
};

/// Greedy rollouts of `model` on every instance under the episode cutoff.
EvalPoint evaluate_model(const QModel &model, const std::vector<const Task *> &instances,
                         const std::vector<std::string> &portfolio, std::size_t cutoff);

/*
  Epsilon-greedy double DQN. Episodes cycle round-robin over the instances;
  every expansion step produces one transition and, after the warmup, one
  gradient update. Every eval_interval updates (and once after the last
  update) the greedy policy is evaluated on the training instances and kept
  if it beats the incumbent on coverage, then on total expansions.
*/
TrainResult train(const std::vector<const Task *> &instances, const std::vector<std::string> &portfolio,
                  const TrainConfig &config);

}  // namespace dhs
