#include "dhs/task.hpp"

#include <algorithm>
#include <numeric>

using namespace std;

namespace dhs {

size_t StateHash::operator()(const State &s) const noexcept {
    // FNV-1a over the value array.
    size_t h = 1469598103934665603ull;
    for (int v : s.values) {
        h ^= static_cast<size_t>(static_cast<unsigned>(v));
        h *= 1099511628211ull;
    }
    return h;
}

PartialAssignment::PartialAssignment(vector<Fact> facts) : facts_(move(facts)) {
    sort(facts_.begin(), facts_.end());
    for (size_t i = 1; i < facts_.size(); ++i) {
        if (facts_[i].var == facts_[i - 1].var)
            throw TaskError("partial assignment binds variable " + to_string(facts_[i].var) + " twice");
    }
}

bool PartialAssignment::satisfied_by(const State &s) const {
    for (const Fact &f : facts_) {
        if (s.values[f.var] != f.value)
            return false;
    }
    return true;
}

bool is_applicable(const Operator &op, const State &s) {
    return op.precondition.satisfied_by(s);
}

State apply(const Operator &op, const State &s) {
    if (!is_applicable(op, s))
        throw InapplicableOperator("operator " + op.name + " is not applicable");
    State result = s;
    for (const Fact &f : op.effect.facts())
        result.values[f.var] = f.value;
    return result;
}

SasTask::SasTask(vector<int> domain_sizes, State initial, vector<Operator> operators,
                 PartialAssignment goal)
    : domain_sizes_(move(domain_sizes)),
      initial_(move(initial)),
      operators_(move(operators)),
      goal_(move(goal)) {
    if (domain_sizes_.empty())
        throw TaskError("task needs at least one variable");
    for (size_t v = 0; v < domain_sizes_.size(); ++v) {
        if (domain_sizes_[v] < 1)
            throw TaskError("variable " + to_string(v) + " has an empty domain");
    }
    if (initial_.values.size() != domain_sizes_.size())
        throw TaskError("initial state has " + to_string(initial_.values.size()) +
                        " values for " + to_string(domain_sizes_.size()) + " variables");
    for (size_t v = 0; v < domain_sizes_.size(); ++v)
        check_fact(Fact{static_cast<int>(v), initial_.values[v]}, "initial state");
    for (const Operator &op : operators_) {
        if (op.cost < 0)
            throw TaskError("operator " + op.name + " has negative cost");
        if (op.effect.empty())
            throw TaskError("operator " + op.name + " has an empty effect");
        for (const Fact &f : op.precondition.facts())
            check_fact(f, "precondition of " + op.name);
        for (const Fact &f : op.effect.facts())
            check_fact(f, "effect of " + op.name);
    }
    for (const Fact &f : goal_.facts())
        check_fact(f, "goal");
}

void SasTask::check_fact(const Fact &f, const string &where) const {
    if (f.var < 0 || static_cast<size_t>(f.var) >= domain_sizes_.size())
        throw TaskError(where + ": variable " + to_string(f.var) + " out of range");
    if (f.value < 0 || f.value >= domain_sizes_[f.var])
        throw TaskError(where + ": value " + to_string(f.value) + " out of range for variable " +
                        to_string(f.var));
}

size_t SasTask::size() const {
    return operators_.size() + accumulate(domain_sizes_.begin(), domain_sizes_.end(), size_t{0});
}

void SasTask::successors(const State &s, vector<Successor> &out) const {
    out.clear();
    for (size_t i = 0; i < operators_.size(); ++i) {
        const Operator &op = operators_[i];
        if (!op.precondition.satisfied_by(s))
            continue;
        State next = s;
        for (const Fact &f : op.effect.facts())
            next.values[f.var] = f.value;
        out.push_back({i, op.cost, move(next)});
    }
}

ExplicitTask::ExplicitTask(int num_states, int initial, vector<int> goal_states)
    : num_states_(num_states), initial_{{initial}}, goal_states_(move(goal_states)) {
    if (num_states_ < 1)
        throw TaskError("explicit task needs at least one state");
    check_state(initial);
    is_goal_.assign(num_states_, 0);
    for (int g : goal_states_) {
        check_state(g);
        is_goal_[g] = 1;
    }
    arcs_.resize(num_states_);
}

void ExplicitTask::check_state(int id) const {
    if (id < 0 || id >= num_states_)
        throw TaskError("state id " + to_string(id) + " out of range");
}

size_t ExplicitTask::operator_index(const string &label) const {
    auto it = find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
        throw TaskError("unknown operator label " + label);
    return static_cast<size_t>(it - labels_.begin());
}

void ExplicitTask::add_arc(int source, const string &label, int cost, int target) {
    check_state(source);
    check_state(target);
    if (cost < 0)
        throw TaskError("arc " + label + " has negative cost");
    auto it = find(labels_.begin(), labels_.end(), label);
    size_t op = static_cast<size_t>(it - labels_.begin());
    if (it == labels_.end())
        labels_.push_back(label);
    arcs_[source].push_back({op, cost, target});
}

size_t ExplicitTask::num_arcs() const {
    size_t total = 0;
    for (const auto &a : arcs_)
        total += a.size();
    return total;
}

void ExplicitTask::set_heuristic(size_t index, int state, HeuristicValue value) {
    check_state(state);
    if (index >= tables_.size()) {
        tables_.resize(index + 1, vector<HeuristicValue>(num_states_));
        table_defined_.resize(index + 1, vector<char>(num_states_, 0));
    }
    tables_[index][state] = value;
    table_defined_[index][state] = 1;
}

HeuristicValue ExplicitTask::heuristic(size_t index, int state) const {
    if (index >= tables_.size())
        throw TaskError("no heuristic table " + to_string(index));
    if (state < 0 || state >= num_states_ || !table_defined_[index][state])
        throw TaskError("heuristic table " + to_string(index) + " has no entry for state " +
                        to_string(state));
    return tables_[index][state];
}

bool ExplicitTask::is_goal(const State &s) const {
    return is_goal_[s.values[0]] != 0;
}

void ExplicitTask::successors(const State &s, vector<Successor> &out) const {
    out.clear();
    for (const Arc &a : arcs_[s.values[0]])
        out.push_back({a.op, a.cost, state_of(a.target)});
}

int64_t validate_plan(const Task &task, const Plan &plan) {
    State current = task.initial_state();
    int64_t cost = 0;
    vector<Successor> succ;
    for (size_t i = 0; i < plan.operators.size(); ++i) {
        size_t op = plan.operators[i];
        if (op >= task.num_operators())
            throw PlanError(PlanError::Kind::UnknownOperator, i,
                            "plan step " + to_string(i) + " names unknown operator " + to_string(op));
        task.successors(current, succ);
        auto it = find_if(succ.begin(), succ.end(), [op](const Successor &s) { return s.op == op; });
        if (it == succ.end())
            throw PlanError(PlanError::Kind::StepInapplicable, i,
                            "plan step " + to_string(i) + " (" + task.operator_name(op) +
                                ") is not applicable");
        cost += it->cost;
        current = move(it->state);
    }
    if (!task.is_goal(current))
        throw PlanError(PlanError::Kind::GoalNotReached, plan.operators.size(),
                        "plan does not reach a goal state");
    return cost;
}

}  // namespace dhs
