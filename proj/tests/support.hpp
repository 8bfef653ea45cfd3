#pragma once

// Random task generation and independent oracles shared by the unit tests and
// the acceptance gate. Nothing here calls into the code under test beyond the
// task data structures.

#include "dhs/task.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

namespace dhs::testing {

struct RandomTaskOptions {
    int min_vars = 2, max_vars = 5;
    int min_domain = 2, max_domain = 4;
    int min_ops = 3, max_ops = 12;
    int max_pre = 2, max_eff = 2;
    int max_cost = 3;
    bool unit_cost = false;
    int max_goal = 3;
};

inline SasTask random_sas_task(std::mt19937_64 &rng, const RandomTaskOptions &o = {}) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    int k = uni(o.min_vars, o.max_vars);
    std::vector<int> domains(k);
    for (int &d : domains)
        d = uni(o.min_domain, o.max_domain);
    auto random_assignment = [&](int lo, int hi) {
        int m = std::min(uni(lo, hi), k);
        std::vector<int> vars(k);
        for (int i = 0; i < k; ++i)
            vars[i] = i;
        std::shuffle(vars.begin(), vars.end(), rng);
        std::vector<Fact> facts;
        for (int i = 0; i < m; ++i)
            facts.push_back({vars[i], uni(0, domains[vars[i]] - 1)});
        return PartialAssignment(facts);
    };
    State init;
    for (int d : domains)
        init.values.push_back(uni(0, d - 1));
    std::vector<Operator> ops;
    int num_ops = uni(o.min_ops, o.max_ops);
    for (int i = 0; i < num_ops; ++i) {
        Operator op;
        op.name = "op" + std::to_string(i);
        op.precondition = random_assignment(0, o.max_pre);
        op.effect = random_assignment(1, o.max_eff);
        op.cost = o.unit_cost ? 1 : uni(0, o.max_cost);
        ops.push_back(op);
    }
    PartialAssignment goal = random_assignment(1, o.max_goal);
    return SasTask(domains, init, ops, goal);
}

inline constexpr std::int64_t kOracleInf = std::numeric_limits<std::int64_t>::max();

/// Naive Bellman iteration over the delete relaxation: recompute every
/// operator's cost from its preconditions until no fact cost changes.
inline std::int64_t naive_relaxed_cost(const SasTask &task, const State &s, bool additive) {
    std::map<std::pair<int, int>, std::int64_t> cost;
    auto get = [&](const Fact &f) {
        auto it = cost.find({f.var, f.value});
        return it == cost.end() ? kOracleInf : it->second;
    };
    for (int v = 0; v < static_cast<int>(s.values.size()); ++v)
        cost[{v, s.values[v]}] = 0;
    auto combine = [&](const std::vector<Fact> &facts) {
        std::int64_t acc = 0;
        for (const Fact &f : facts) {
            std::int64_t c = get(f);
            if (c == kOracleInf)
                return kOracleInf;
            acc = additive ? acc + c : std::max(acc, c);
        }
        return acc;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Operator &op : task.operators()) {
            std::int64_t pre = combine(op.precondition.facts());
            if (pre == kOracleInf)
                continue;
            std::int64_t c = pre + op.cost;
            for (const Fact &f : op.effect.facts()) {
                if (c < get(f)) {
                    cost[{f.var, f.value}] = c;
                    changed = true;
                }
            }
        }
    }
    return combine(task.goal().facts());
}

/// Checks that the operators, applied in order with delete-relaxed semantics
/// (facts only accumulate), are applicable and reach the goal. Returns the
/// summed cost or -1 when invalid.
inline std::int64_t relaxed_plan_cost(const SasTask &task, const State &s, const std::vector<std::size_t> &plan) {
    std::set<std::pair<int, int>> reached;
    for (int v = 0; v < static_cast<int>(s.values.size()); ++v)
        reached.insert({v, s.values[v]});
    std::int64_t total = 0;
    for (std::size_t i : plan) {
        const Operator &op = task.operators().at(i);
        for (const Fact &f : op.precondition.facts()) {
            if (!reached.count({f.var, f.value}))
                return -1;
        }
        for (const Fact &f : op.effect.facts())
            reached.insert({f.var, f.value});
        total += op.cost;
    }
    for (const Fact &f : task.goal().facts()) {
        if (!reached.count({f.var, f.value}))
            return -1;
    }
    return total;
}

/// Every state reachable from the initial state (BFS order), or empty when
/// more than `limit` are found.
inline std::vector<State> reachable_states(const Task &task, std::size_t limit) {
    std::vector<State> order{task.initial_state()};
    std::unordered_map<State, std::size_t, StateHash> seen{{task.initial_state(), 0}};
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const Successor &succ : task.successors(order[i])) {
            if (seen.emplace(succ.state, order.size()).second) {
                order.push_back(succ.state);
                if (order.size() > limit)
                    return {};
            }
        }
    }
    return order;
}

/// Goal distance of every reachable state via Dijkstra on the reversed
/// reachable transition graph (multi-source from all goal states).
inline std::unordered_map<State, std::int64_t, StateHash> backward_goal_distances(const Task &task,
                                                                                   const std::vector<State> &states) {
    std::unordered_map<State, std::size_t, StateHash> index;
    for (std::size_t i = 0; i < states.size(); ++i)
        index[states[i]] = i;
    std::vector<std::vector<std::pair<std::size_t, int>>> reverse(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (const Successor &succ : task.successors(states[i]))
            reverse[index.at(succ.state)].push_back({i, succ.cost});
    }
    std::vector<std::int64_t> dist(states.size(), kOracleInf);
    using Item = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (task.is_goal(states[i])) {
            dist[i] = 0;
            pq.push({0, i});
        }
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != dist[u])
            continue;
        for (auto [v, c] : reverse[u]) {
            if (d + c < dist[v]) {
                dist[v] = d + c;
                pq.push({dist[v], v});
            }
        }
    }
    std::unordered_map<State, std::int64_t, StateHash> out;
    for (std::size_t i = 0; i < states.size(); ++i)
        out[states[i]] = dist[i];
    return out;
}

}  // namespace dhs::testing
