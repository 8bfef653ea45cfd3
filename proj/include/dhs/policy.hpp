#pragma once

#include "dhs/features.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dhs {

enum class Outcome { Solved, Exhausted, BudgetExceeded, ControllerDisconnected, ProtocolError };

const char *outcome_name(Outcome o);
Outcome parse_outcome(const std::string &name);

/// What a policy sees before each expansion.
struct StepView {
    std::size_t t;
    const FeatureVector &features;
    const FeatureDiff &diff;
    /// Reward of the previous step; 0 at t = 0.
    double reward;
};

/*
  Maps the planner state at step t to the index of the open list to expand
  from. The search calls begin_episode once, select once per step and
  end_episode once with the final planner state.
*/
class ControlPolicy {
public:
    virtual ~ControlPolicy() = default;

    virtual void begin_episode(std::size_t num_heuristics) { num_heuristics_ = num_heuristics; }
    virtual std::size_t select(const StepView &step) = 0;
    virtual void end_episode(const StepView &, Outcome) {}
    virtual std::string spec() const = 0;

protected:
    std::size_t num_heuristics_ = 0;
};

class InvalidPolicy : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown from select() to stop the search with the given outcome.
class PolicyAbort : public std::runtime_error {
public:
    PolicyAbort(Outcome outcome, const std::string &what) : std::runtime_error(what), outcome_(outcome) {}
    Outcome outcome() const { return outcome_; }

private:
    Outcome outcome_;
};

/// perm[t mod n]; throws InvalidPolicy unless perm is a permutation of 0..n-1.
std::size_t alternation_select(const std::vector<std::size_t> &perm, std::size_t t);
/// Argmin of the mean over nonempty lists, lowest index on ties. Throws
/// std::runtime_error when every list is empty.
std::size_t argmin_mu_select(const FeatureVector &features);
/// All n! permutations of 0..n-1 in lexicographic order.
std::vector<std::vector<std::size_t>> all_permutations(std::size_t n);

class SinglePolicy : public ControlPolicy {
public:
    explicit SinglePolicy(std::size_t index) : index_(index) {}
    void begin_episode(std::size_t n) override;
    std::size_t select(const StepView &) override { return index_; }
    std::string spec() const override { return "single:" + std::to_string(index_); }
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class AlternationPolicy : public ControlPolicy {
public:
    explicit AlternationPolicy(std::vector<std::size_t> perm);
    void begin_episode(std::size_t n) override;
    std::size_t select(const StepView &step) override { return alternation_select(perm_, step.t); }
    std::string spec() const override;
    const std::vector<std::size_t> &permutation() const { return perm_; }

private:
    std::vector<std::size_t> perm_;
};

/// Uniform choice per step; the generator restarts from the seed every episode.
class RandomPolicy : public ControlPolicy {
public:
    explicit RandomPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
    void begin_episode(std::size_t n) override;
    std::size_t select(const StepView &) override;
    std::string spec() const override { return "rnd:" + std::to_string(seed_); }

private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
};

class ArgminMuPolicy : public ControlPolicy {
public:
    std::size_t select(const StepView &step) override { return argmin_mu_select(step.features); }
    std::string spec() const override { return "argmin-mu"; }
};

/// Replays a fixed sequence; repeats the last entry once the sequence runs out.
class ScriptedPolicy : public ControlPolicy {
public:
    explicit ScriptedPolicy(std::vector<std::size_t> sequence);
    std::size_t select(const StepView &step) override;
    std::string spec() const override;

private:
    std::vector<std::size_t> sequence_;
};

/// Dynamic policy given as a function of (t, features).
class FeaturePolicy : public ControlPolicy {
public:
    using Rule = std::function<std::size_t(std::size_t t, const FeatureVector &)>;
    FeaturePolicy(Rule rule, std::string spec) : rule_(std::move(rule)), spec_(std::move(spec)) {}
    std::size_t select(const StepView &step) override { return rule_(step.t, step.features); }
    std::string spec() const override { return spec_; }

private:
    Rule rule_;
    std::string spec_;
};

/// Re-expresses a selection (single) or alternation policy as a dynamic
/// policy whose rule ignores the features. Throws InvalidPolicy otherwise.
std::unique_ptr<ControlPolicy> lift_policy(const ControlPolicy &policy);

/*
  Policy spec strings: single:<i>, alt:<perm digits>, rnd:<seed>, argmin-mu,
  scripted:<digits>, q:<model-file>, remote:<host:port>.
*/
std::unique_ptr<ControlPolicy> make_policy(const std::string &spec);

}  // namespace dhs
