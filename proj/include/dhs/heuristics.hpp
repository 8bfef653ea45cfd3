#pragma once

#include "dhs/heuristic_value.hpp"
#include "dhs/task.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dhs {

class Heuristic {
public:
    virtual ~Heuristic() = default;
    /// Deterministic; may reuse internal scratch buffers, so one instance must
    /// not be shared between threads.
    virtual HeuristicValue evaluate(const State &s) = 0;
    virtual std::string name() const = 0;
};

class GoalCountHeuristic : public Heuristic {
public:
    explicit GoalCountHeuristic(const SasTask &task) : task_(task) {}
    HeuristicValue evaluate(const State &s) override;
    std::string name() const override { return "goalcount"; }

private:
    const SasTask &task_;
};

/*
  Delete-relaxation exploration shared by h_max, h_add and h_ff. Facts are
  numbered densely; each operator keeps a counter of unreached preconditions
  and fires once the counter hits zero, so one evaluation costs
  O(total precondition size + queue operations).
*/
class RelaxedExploration {
public:
    enum class Combine { Max, Sum };

    explicit RelaxedExploration(const SasTask &task);

    /// Runs the exploration from `s`. Returns the combined goal cost.
    HeuristicValue explore(const State &s, Combine combine);

    int fact_id(int var, int value) const { return fact_offset_[var] + value; }
    std::size_t num_facts() const { return fact_cost_.size(); }
    /// Cost of a fact after the last explore(); infinity when unreached.
    HeuristicValue fact_cost(int fact) const;
    /// Relaxed plan from best supporters of the last Sum exploration; lowest
    /// operator index wins among equal-cost supporters.
    std::vector<std::size_t> extract_relaxed_plan(const State &s);

    const SasTask &task() const { return task_; }

private:
    struct RelaxedOp {
        std::vector<int> pre;
        std::vector<int> eff;
        std::int64_t cost;
    };

    void fire(std::size_t op, std::int64_t cost);

    const SasTask &task_;
    std::vector<int> fact_offset_;
    std::vector<RelaxedOp> ops_;
    std::vector<std::vector<std::size_t>> pre_of_;
    std::vector<int> goal_facts_;

    // scratch
    std::vector<std::int64_t> fact_cost_;
    std::vector<int> settle_order_;
    std::vector<int> unsat_;
    std::vector<std::int64_t> acc_;
    std::vector<std::pair<std::int64_t, int>> heap_;
    Combine combine_ = Combine::Sum;
};

class HMaxHeuristic : public Heuristic {
public:
    explicit HMaxHeuristic(const SasTask &task) : exploration_(task) {}
    HeuristicValue evaluate(const State &s) override {
        return exploration_.explore(s, RelaxedExploration::Combine::Max);
    }
    std::string name() const override { return "hmax"; }

private:
    RelaxedExploration exploration_;
};

class HAddHeuristic : public Heuristic {
public:
    explicit HAddHeuristic(const SasTask &task) : exploration_(task) {}
    HeuristicValue evaluate(const State &s) override {
        return exploration_.explore(s, RelaxedExploration::Combine::Sum);
    }
    std::string name() const override { return "hadd"; }

private:
    RelaxedExploration exploration_;
};

class FFHeuristic : public Heuristic {
public:
    explicit FFHeuristic(const SasTask &task) : exploration_(task) {}
    HeuristicValue evaluate(const State &s) override;
    std::string name() const override { return "ff"; }
    /// Operators of the relaxed plan behind the last finite evaluate().
    const std::vector<std::size_t> &last_relaxed_plan() const { return plan_; }

private:
    RelaxedExploration exploration_;
    std::vector<std::size_t> plan_;
};

class TabularHeuristic : public Heuristic {
public:
    TabularHeuristic(const ExplicitTask &task, std::size_t index);
    HeuristicValue evaluate(const State &s) override { return task_.heuristic(index_, s.values[0]); }
    std::string name() const override { return "tabular:" + std::to_string(index_); }

private:
    const ExplicitTask &task_;
    std::size_t index_;
};

class StateBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact goal distance by uniform-cost search. Test oracle only; throws
/// StateBudgetExceeded when more than `max_states` states are generated.
class PerfectHeuristic : public Heuristic {
public:
    explicit PerfectHeuristic(const Task &task, std::size_t max_states = 1'000'000)
        : task_(task), max_states_(max_states) {}
    HeuristicValue evaluate(const State &s) override;
    std::string name() const override { return "perfect"; }

private:
    const Task &task_;
    std::size_t max_states_;
};

/// Ordered heuristic collection; list index i is action i of a control policy.
class Portfolio {
public:
    Portfolio() = default;
    void add(std::unique_ptr<Heuristic> h) { heuristics_.push_back(std::move(h)); }
    std::size_t size() const { return heuristics_.size(); }
    Heuristic &operator[](std::size_t i) { return *heuristics_[i]; }
    std::vector<std::string> names() const;

private:
    std::vector<std::unique_ptr<Heuristic>> heuristics_;
};

/// Names: ff, goalcount, hmax, hadd (SAS+ tasks), tabular:<i> (explicit tasks).
std::unique_ptr<Heuristic> make_heuristic(const Task &task, const std::string &name);
Portfolio make_portfolio(const Task &task, const std::vector<std::string> &names);
/// ff,goalcount,hmax,hadd for SAS+ tasks; every table for explicit tasks.
std::vector<std::string> default_portfolio_names(const Task &task);
/// Splits "ff,goalcount,..." and maps "default" to default_portfolio_names.
std::vector<std::string> parse_portfolio_spec(const Task &task, const std::string &spec);

}  // namespace dhs
