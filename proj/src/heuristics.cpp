#include "dhs/heuristics.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

using namespace std;

namespace dhs {
namespace {
constexpr int64_t kUnreached = numeric_limits<int64_t>::max();
}

HeuristicValue GoalCountHeuristic::evaluate(const State &s) {
    int64_t unsatisfied = 0;
    for (const Fact &f : task_.goal().facts()) {
        if (s.values[f.var] != f.value)
            ++unsatisfied;
    }
    return HeuristicValue(unsatisfied);
}

RelaxedExploration::RelaxedExploration(const SasTask &task) : task_(task) {
    int total = 0;
    for (int d : task.domain_sizes()) {
        fact_offset_.push_back(total);
        total += d;
    }
    pre_of_.resize(total);
    for (size_t i = 0; i < task.operators().size(); ++i) {
        const Operator &op = task.operators()[i];
        RelaxedOp rop;
        for (const Fact &f : op.precondition.facts())
            rop.pre.push_back(fact_id(f.var, f.value));
        for (const Fact &f : op.effect.facts())
            rop.eff.push_back(fact_id(f.var, f.value));
        rop.cost = op.cost;
        for (int p : rop.pre)
            pre_of_[p].push_back(i);
        ops_.push_back(move(rop));
    }
    for (const Fact &f : task.goal().facts())
        goal_facts_.push_back(fact_id(f.var, f.value));
    fact_cost_.assign(total, kUnreached);
    settle_order_.assign(total, -1);
    unsat_.assign(ops_.size(), 0);
    acc_.assign(ops_.size(), 0);
}

HeuristicValue RelaxedExploration::fact_cost(int fact) const {
    int64_t c = fact_cost_[fact];
    return c == kUnreached ? HeuristicValue::infinity() : HeuristicValue(c);
}

void RelaxedExploration::fire(size_t op, int64_t cost) {
    for (int e : ops_[op].eff) {
        if (cost < fact_cost_[e]) {
            fact_cost_[e] = cost;
            heap_.emplace_back(cost, e);
            push_heap(heap_.begin(), heap_.end(), greater<>());
        }
    }
}

HeuristicValue RelaxedExploration::explore(const State &s, Combine combine) {
    combine_ = combine;
    fill(fact_cost_.begin(), fact_cost_.end(), kUnreached);
    fill(settle_order_.begin(), settle_order_.end(), -1);
    fill(acc_.begin(), acc_.end(), 0);
    heap_.clear();
    for (size_t i = 0; i < ops_.size(); ++i)
        unsat_[i] = static_cast<int>(ops_[i].pre.size());

    for (size_t v = 0; v < s.values.size(); ++v) {
        int f = fact_id(static_cast<int>(v), s.values[v]);
        fact_cost_[f] = 0;
        heap_.emplace_back(0, f);
    }
    make_heap(heap_.begin(), heap_.end(), greater<>());
    for (size_t i = 0; i < ops_.size(); ++i) {
        if (ops_[i].pre.empty())
            fire(i, ops_[i].cost);
    }

    size_t goals_left = goal_facts_.size();
    int order = 0;
    while (!heap_.empty() && goals_left > 0) {
        pop_heap(heap_.begin(), heap_.end(), greater<>());
        auto [cost, f] = heap_.back();
        heap_.pop_back();
        if (cost > fact_cost_[f] || settle_order_[f] >= 0)
            continue;
        settle_order_[f] = order++;
        for (int g : goal_facts_) {
            if (g == f)
                --goals_left;
        }
        for (size_t op : pre_of_[f]) {
            if (combine == Combine::Sum)
                acc_[op] += cost;
            else
                acc_[op] = max(acc_[op], cost);
            if (--unsat_[op] == 0)
                fire(op, acc_[op] + ops_[op].cost);
        }
    }

    int64_t total = 0;
    for (int g : goal_facts_) {
        if (fact_cost_[g] == kUnreached || settle_order_[g] < 0)
            return HeuristicValue::infinity();
        total = combine == Combine::Sum ? total + fact_cost_[g] : max(total, fact_cost_[g]);
    }
    return HeuristicValue(total);
}

vector<size_t> RelaxedExploration::extract_relaxed_plan(const State &s) {
    // Best supporter of a fact: the lowest-index operator whose preconditions
    // were all settled before the fact and whose total cost equals the fact
    // cost. Settle order makes the supporter graph acyclic even with
    // zero-cost operators.
    vector<int> supporter(fact_cost_.size(), -1);
    for (size_t i = 0; i < ops_.size(); ++i) {
        const RelaxedOp &op = ops_[i];
        int latest_pre = -1;
        int64_t pre_cost = 0;
        bool reached = true;
        for (int p : op.pre) {
            if (settle_order_[p] < 0) {
                reached = false;
                break;
            }
            latest_pre = max(latest_pre, settle_order_[p]);
            pre_cost += fact_cost_[p];
        }
        if (!reached)
            continue;
        for (int e : op.eff) {
            if (supporter[e] >= 0 || settle_order_[e] < 0)
                continue;
            if (settle_order_[e] > latest_pre && fact_cost_[e] == pre_cost + op.cost)
                supporter[e] = static_cast<int>(i);
        }
    }

    vector<char> in_state(fact_cost_.size(), 0);
    for (size_t v = 0; v < s.values.size(); ++v)
        in_state[fact_id(static_cast<int>(v), s.values[v])] = 1;

    vector<char> marked(fact_cost_.size(), 0);
    vector<char> used(ops_.size(), 0);
    vector<size_t> plan;
    vector<int> stack(goal_facts_.begin(), goal_facts_.end());
    while (!stack.empty()) {
        int f = stack.back();
        stack.pop_back();
        if (marked[f] || in_state[f])
            continue;
        marked[f] = 1;
        int op = supporter[f];
        if (op < 0)
            throw logic_error("relaxed plan extraction reached a fact without supporter");
        if (!used[op]) {
            used[op] = 1;
            plan.push_back(static_cast<size_t>(op));
            for (int p : ops_[op].pre)
                stack.push_back(p);
        }
    }
    sort(plan.begin(), plan.end(), [this](size_t a, size_t b) {
        auto key = [this](size_t o) {
            int k = -1;
            for (int p : ops_[o].pre)
                k = max(k, settle_order_[p]);
            return k;
        };
        int ka = key(a), kb = key(b);
        return ka != kb ? ka < kb : a < b;
    });
    return plan;
}

HeuristicValue FFHeuristic::evaluate(const State &s) {
    plan_.clear();
    HeuristicValue hadd = exploration_.explore(s, RelaxedExploration::Combine::Sum);
    if (hadd.is_infinite())
        return hadd;
    plan_ = exploration_.extract_relaxed_plan(s);
    int64_t cost = 0;
    for (size_t op : plan_)
        cost += exploration_.task().operators()[op].cost;
    return HeuristicValue(cost);
}

TabularHeuristic::TabularHeuristic(const ExplicitTask &task, size_t index) : task_(task), index_(index) {
    if (index >= task.num_heuristics())
        throw TaskError("task has no heuristic table " + to_string(index));
}

HeuristicValue PerfectHeuristic::evaluate(const State &s) {
    using Entry = pair<int64_t, size_t>;
    unordered_map<State, size_t, StateHash> ids;
    vector<State> states;
    vector<int64_t> dist;
    priority_queue<Entry, vector<Entry>, greater<>> queue;
    ids.emplace(s, 0);
    states.push_back(s);
    dist.push_back(0);
    queue.emplace(0, 0);
    vector<Successor> succ;
    while (!queue.empty()) {
        auto [d, id] = queue.top();
        queue.pop();
        if (d > dist[id])
            continue;
        if (task_.is_goal(states[id]))
            return HeuristicValue(d);
        task_.successors(states[id], succ);
        for (Successor &sc : succ) {
            int64_t nd = d + sc.cost;
            auto [it, inserted] = ids.emplace(sc.state, states.size());
            if (inserted) {
                if (states.size() >= max_states_)
                    throw StateBudgetExceeded("perfect heuristic exceeded state budget");
                states.push_back(move(sc.state));
                dist.push_back(nd);
                queue.emplace(nd, it->second);
            } else if (nd < dist[it->second]) {
                dist[it->second] = nd;
                queue.emplace(nd, it->second);
            }
        }
    }
    return HeuristicValue::infinity();
}

vector<string> Portfolio::names() const {
    vector<string> out;
    for (const auto &h : heuristics_)
        out.push_back(h->name());
    return out;
}

unique_ptr<Heuristic> make_heuristic(const Task &task, const string &name) {
    if (name.rfind("tabular:", 0) == 0) {
        const auto *explicit_task = dynamic_cast<const ExplicitTask *>(&task);
        if (!explicit_task)
            throw invalid_argument("tabular heuristics need an explicit task");
        size_t index = stoul(name.substr(8));
        return make_unique<TabularHeuristic>(*explicit_task, index);
    }
    if (name == "perfect")
        return make_unique<PerfectHeuristic>(task);
    const auto *sas = dynamic_cast<const SasTask *>(&task);
    if (!sas)
        throw invalid_argument("heuristic '" + name + "' needs a SAS+ task");
    if (name == "ff")
        return make_unique<FFHeuristic>(*sas);
    if (name == "goalcount")
        return make_unique<GoalCountHeuristic>(*sas);
    if (name == "hmax")
        return make_unique<HMaxHeuristic>(*sas);
    if (name == "hadd")
        return make_unique<HAddHeuristic>(*sas);
    throw invalid_argument("unknown heuristic '" + name + "'");
}

Portfolio make_portfolio(const Task &task, const vector<string> &names) {
    if (names.empty())
        throw invalid_argument("portfolio must contain at least one heuristic");
    Portfolio p;
    for (const string &n : names)
        p.add(make_heuristic(task, n));
    return p;
}

vector<string> default_portfolio_names(const Task &task) {
    if (const auto *e = dynamic_cast<const ExplicitTask *>(&task)) {
        vector<string> names;
        for (size_t i = 0; i < e->num_heuristics(); ++i)
            names.push_back("tabular:" + to_string(i));
        return names;
    }
    return {"ff", "goalcount", "hmax", "hadd"};
}

vector<string> parse_portfolio_spec(const Task &task, const string &spec) {
    if (spec.empty() || spec == "default")
        return default_portfolio_names(task);
    vector<string> names;
    stringstream in(spec);
    string item;
    while (getline(in, item, ','))
        if (!item.empty())
            names.push_back(item);
    return names;
}

}  // namespace dhs
