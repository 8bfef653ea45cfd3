#pragma once

#include "dhs/heuristic_value.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhs {

struct Fact {
    int var = 0;
    int value = 0;

    friend auto operator<=>(const Fact &, const Fact &) = default;
};

/// Total assignment of a value index to every variable.
struct State {
    std::vector<int> values;

    friend bool operator==(const State &, const State &) = default;
};

struct StateHash {
    std::size_t operator()(const State &s) const noexcept;
};

/*
  A consistent set of facts, kept sorted by variable. Construction rejects two
  facts over the same variable.
*/
class PartialAssignment {
public:
    PartialAssignment() = default;
    explicit PartialAssignment(std::vector<Fact> facts);

    const std::vector<Fact> &facts() const { return facts_; }
    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }
    bool satisfied_by(const State &s) const;

    friend bool operator==(const PartialAssignment &, const PartialAssignment &) = default;

private:
    std::vector<Fact> facts_;
};

struct Operator {
    std::string name;
    PartialAssignment precondition;
    PartialAssignment effect;
    int cost = 1;
};

struct Plan {
    std::vector<std::size_t> operators;
};

struct Successor {
    std::size_t op;
    int cost;
    State state;
};

class TaskError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InapplicableOperator : public TaskError {
public:
    using TaskError::TaskError;
};

class PlanError : public TaskError {
public:
    enum class Kind { StepInapplicable, GoalNotReached, UnknownOperator };

    PlanError(Kind kind, std::size_t step, const std::string &what)
        : TaskError(what), kind_(kind), step_(step) {}

    Kind kind() const { return kind_; }
    /// Index of the failing plan step (plan length for GoalNotReached).
    std::size_t step() const { return step_; }

private:
    Kind kind_;
    std::size_t step_;
};

/*
  Common view of a planning task used by search, heuristics and policies.
  Both backends expose initial state, goal test and successor generation;
  successors are produced in operator order so whole searches are
  deterministic.
*/
class Task {
public:
    virtual ~Task() = default;

    virtual const State &initial_state() const = 0;
    virtual bool is_goal(const State &s) const = 0;
    virtual void successors(const State &s, std::vector<Successor> &out) const = 0;
    virtual std::size_t num_operators() const = 0;
    virtual const std::string &operator_name(std::size_t op) const = 0;

    std::vector<Successor> successors(const State &s) const {
        std::vector<Successor> out;
        successors(s, out);
        return out;
    }
};

bool is_applicable(const Operator &op, const State &s);
/// Throws InapplicableOperator when the precondition is not satisfied.
State apply(const Operator &op, const State &s);

class SasTask : public Task {
public:
    SasTask(std::vector<int> domain_sizes, State initial, std::vector<Operator> operators,
            PartialAssignment goal);

    const std::vector<int> &domain_sizes() const { return domain_sizes_; }
    std::size_t num_variables() const { return domain_sizes_.size(); }
    const std::vector<Operator> &operators() const { return operators_; }
    const PartialAssignment &goal() const { return goal_; }
    /// #operators + #facts
    std::size_t size() const;

    const State &initial_state() const override { return initial_; }
    bool is_goal(const State &s) const override { return goal_.satisfied_by(s); }
    using Task::successors;
    void successors(const State &s, std::vector<Successor> &out) const override;
    std::size_t num_operators() const override { return operators_.size(); }
    const std::string &operator_name(std::size_t op) const override { return operators_.at(op).name; }

private:
    void check_fact(const Fact &f, const std::string &where) const;

    std::vector<int> domain_sizes_;
    State initial_;
    std::vector<Operator> operators_;
    PartialAssignment goal_;
};

/*
  Task given directly as a transition system. A state is encoded as a
  single-variable State whose only value is the state id, so the search
  registry treats both backends uniformly. Heuristic tables are per
  heuristic, per state.
*/
class ExplicitTask : public Task {
public:
    struct Arc {
        std::size_t op;
        int cost;
        int target;
    };

    ExplicitTask(int num_states, int initial, std::vector<int> goal_states);

    /// Adds an arc labelled `label`; equal labels share one operator index.
    void add_arc(int source, const std::string &label, int cost, int target);
    void set_heuristic(std::size_t index, int state, HeuristicValue value);

    int num_states() const { return num_states_; }
    int initial_id() const { return initial_.values[0]; }
    const std::vector<int> &goal_states() const { return goal_states_; }
    const std::vector<Arc> &arcs(int state) const { return arcs_.at(state); }
    std::size_t num_arcs() const;
    std::size_t num_heuristics() const { return tables_.size(); }
    const std::vector<HeuristicValue> &heuristic_table(std::size_t index) const { return tables_.at(index); }
    bool has_heuristic(std::size_t index, int state) const {
        return index < tables_.size() && state >= 0 && state < num_states_ && table_defined_[index][state];
    }
    /// Throws TaskError for a missing table or state.
    HeuristicValue heuristic(std::size_t index, int state) const;

    const State &initial_state() const override { return initial_; }
    bool is_goal(const State &s) const override;
    using Task::successors;
    void successors(const State &s, std::vector<Successor> &out) const override;
    std::size_t num_operators() const override { return labels_.size(); }
    const std::string &operator_name(std::size_t op) const override { return labels_.at(op); }
    std::size_t operator_index(const std::string &label) const;

    static State state_of(int id) { return State{{id}}; }

private:
    void check_state(int id) const;

    int num_states_;
    State initial_;
    std::vector<int> goal_states_;
    std::vector<char> is_goal_;
    std::vector<std::vector<Arc>> arcs_;
    std::vector<std::string> labels_;
    std::vector<std::vector<HeuristicValue>> tables_;
    std::vector<std::vector<char>> table_defined_;
};

/// Returns the plan cost, or throws PlanError.
std::int64_t validate_plan(const Task &task, const Plan &plan);

}  // namespace dhs
