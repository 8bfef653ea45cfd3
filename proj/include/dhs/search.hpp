#pragma once

#include "dhs/features.hpp"
#include "dhs/heuristics.hpp"
#include "dhs/open_list.hpp"
#include "dhs/policy.hpp"
#include "dhs/task.hpp"

#include <chrono>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dhs {

struct SearchBudget {
    std::size_t max_expansions = std::numeric_limits<std::size_t>::max();
    double max_seconds = std::numeric_limits<double>::infinity();
};

enum class TraceMode { Full, ChoicesOnly, None };

struct TraceStep {
    std::size_t t;
    /// Open list actually expanded from (after empty-list fallback).
    std::size_t chosen;
    double reward;
    /// Empty unless the trace mode is Full.
    FeatureDiff diff;
};

struct SearchResult {
    Outcome outcome = Outcome::Exhausted;
    std::optional<Plan> plan;
    std::int64_t cost = 0;
    std::size_t expansions = 0;
    std::size_t generated = 0;
    std::size_t num_heuristics = 0;
    std::vector<TraceStep> trace;
    double wall_time_ms = 0.0;

    bool solved() const { return outcome == Outcome::Solved; }
};

struct SearchNode {
    static constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

    NodeId parent = kNoParent;
    std::size_t op = 0;
    int op_cost = 0;
    std::vector<HeuristicValue> h_values;
    bool expanded = false;
};

/*
  Greedy best-first search with one open list per portfolio heuristic. Each
  step the control policy picks a list; the search pops its best live entry,
  goal-tests it and otherwise expands it, evaluating every new successor with
  all heuristics. Stale entries are skipped lazily in the heaps but removed
  exactly from the per-list statistics at expansion time.
*/
class SearchEngine {
public:
    SearchEngine(const Task &task, Portfolio &portfolio, SearchBudget budget = {},
                 TraceMode trace_mode = TraceMode::Full);

    /// Calls policy.begin_episode, steps until done, then end_episode.
    SearchResult run(ControlPolicy &policy);

    void begin(ControlPolicy &policy);
    /// One controller step: features, policy choice, pop, goal test, expansion.
    void step(ControlPolicy &policy);
    /// Reports the final planner state to the policy and returns the result.
    SearchResult finish(ControlPolicy &policy);
    /// Stops the search with the given outcome (used for aborted runs).
    void abort(Outcome outcome);

    bool done() const { return done_; }
    std::size_t num_lists() const { return lists_.size(); }
    std::size_t t() const { return t_; }
    std::size_t expansions() const { return expansions_; }

    /// Pops the best live entry of `list`, falling back cyclically to the next
    /// nonempty list. Sets `used` to the list popped from. Throws
    /// std::runtime_error when all lists are empty.
    NodeId select_and_pop(std::size_t list, std::size_t &used);
    /// Registers a state; new states are evaluated and inserted into every
    /// list with a finite value. Returns false for duplicates.
    bool insert_successor(const State &state, NodeId parent, std::size_t op, int op_cost);

    std::span<const OpenListStats> stats() const { return stats_; }
    /// Statistics rebuilt from the heap contents, skipping stale entries.
    std::vector<OpenListStats> recompute_stats() const;
    const OpenList &open_list(std::size_t i) const { return lists_[i]; }
    const SearchNode &node(NodeId id) const { return nodes_[id]; }
    std::size_t num_nodes() const { return nodes_.size(); }
    FeatureVector current_features() const { return compute_features(stats_, t_); }

private:
    void finish_with(Outcome outcome);
    Plan extract_plan(NodeId goal, std::int64_t &cost) const;
    bool lists_empty() const;
    double elapsed_seconds() const;

    const Task &task_;
    Portfolio &portfolio_;
    SearchBudget budget_;
    TraceMode trace_mode_;

    std::unordered_map<State, NodeId, StateHash> registry_;
    std::vector<State> states_;
    std::vector<SearchNode> nodes_;
    std::vector<OpenList> lists_;
    std::vector<OpenListStats> stats_;
    std::uint64_t next_seq_ = 0;

    std::size_t t_ = 0;
    std::size_t expansions_ = 0;
    bool done_ = false;
    bool started_ = false;
    FeatureVector prev_features_;
    double pending_reward_ = 0.0;
    std::vector<Successor> succ_buffer_;
    std::chrono::steady_clock::time_point start_time_;
    SearchResult result_;
};

SearchResult run_gbfs(const Task &task, Portfolio &portfolio, ControlPolicy &policy,
                      SearchBudget budget = {}, TraceMode trace_mode = TraceMode::Full);

/// JSON summary: outcome, expansions, generated, cost, wall_time_ms.
std::string result_summary_json(const SearchResult &r, bool include_timing = true);
/// Header t,chosen_h,reward,d0..d{5n-1}; one row per expansion step.
std::string trace_csv(const SearchResult &r);

struct TraceRow {
    std::size_t t;
    std::size_t chosen;
    double reward;
};
/// Reads the first three columns of a trace CSV.
std::vector<TraceRow> read_trace_csv(const std::string &text);

}  // namespace dhs
