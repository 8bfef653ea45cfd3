#include "dhs/search.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

using namespace std;

namespace dhs {

SearchEngine::SearchEngine(const Task &task, Portfolio &portfolio, SearchBudget budget, TraceMode trace_mode)
    : task_(task), portfolio_(portfolio), budget_(budget), trace_mode_(trace_mode) {
    if (portfolio.size() == 0)
        throw invalid_argument("search needs a nonempty portfolio");
    if (budget.max_expansions == 0 || !(budget.max_seconds > 0))
        throw invalid_argument("search budget must be positive");
    lists_.resize(portfolio.size());
    stats_.resize(portfolio.size());
    result_.num_heuristics = portfolio.size();
    start_time_ = chrono::steady_clock::now();
    insert_successor(task.initial_state(), SearchNode::kNoParent, 0, 0);
    if (task.is_goal(task.initial_state())) {
        done_ = true;
        result_.outcome = Outcome::Solved;
        result_.plan = Plan{};
        result_.cost = 0;
    }
}

double SearchEngine::elapsed_seconds() const {
    return chrono::duration<double>(chrono::steady_clock::now() - start_time_).count();
}

bool SearchEngine::insert_successor(const State &state, NodeId parent, size_t op, int op_cost) {
    auto [it, inserted] = registry_.emplace(state, static_cast<NodeId>(nodes_.size()));
    if (!inserted)
        return false;
    NodeId id = it->second;
    SearchNode node;
    node.parent = parent;
    node.op = op;
    node.op_cost = op_cost;
    node.h_values.reserve(portfolio_.size());
    for (size_t i = 0; i < portfolio_.size(); ++i)
        node.h_values.push_back(portfolio_[i].evaluate(state));
    states_.push_back(state);
    ++result_.generated;
    for (size_t i = 0; i < lists_.size(); ++i) {
        HeuristicValue h = node.h_values[i];
        if (h.is_infinite())
            continue;
        lists_[i].push({h.value(), next_seq_++, id});
        stats_[i].add(h.value());
    }
    nodes_.push_back(move(node));
    return true;
}

bool SearchEngine::lists_empty() const {
    return all_of(stats_.begin(), stats_.end(), [](const OpenListStats &s) { return s.count() == 0; });
}

NodeId SearchEngine::select_and_pop(size_t list, size_t &used) {
    size_t n = lists_.size();
    for (size_t k = 0; k < n; ++k) {
        size_t i = (list + k) % n;
        OpenList &open = lists_[i];
        while (!open.empty() && nodes_[open.top().node].expanded)
            open.pop();
        if (open.empty())
            continue;
        NodeId id = open.top().node;
        open.pop();
        used = i;
        return id;
    }
    throw runtime_error("all open lists are empty");
}

vector<OpenListStats> SearchEngine::recompute_stats() const {
    vector<OpenListStats> out(lists_.size());
    for (size_t i = 0; i < lists_.size(); ++i) {
        for (const OpenListEntry &e : lists_[i].entries()) {
            if (!nodes_[e.node].expanded)
                out[i].add(e.h);
        }
    }
    return out;
}

Plan SearchEngine::extract_plan(NodeId goal, int64_t &cost) const {
    Plan plan;
    cost = 0;
    for (NodeId id = goal; nodes_[id].parent != SearchNode::kNoParent; id = nodes_[id].parent) {
        plan.operators.push_back(nodes_[id].op);
        cost += nodes_[id].op_cost;
    }
    reverse(plan.operators.begin(), plan.operators.end());
    return plan;
}

void SearchEngine::finish_with(Outcome outcome) {
    done_ = true;
    result_.outcome = outcome;
}

void SearchEngine::abort(Outcome outcome) {
    if (!done_)
        finish_with(outcome);
}

void SearchEngine::begin(ControlPolicy &policy) {
    started_ = true;
    start_time_ = chrono::steady_clock::now();
    policy.begin_episode(lists_.size());
}

void SearchEngine::step(ControlPolicy &policy) {
    if (done_)
        return;
    if (elapsed_seconds() > budget_.max_seconds) {
        finish_with(Outcome::BudgetExceeded);
        return;
    }
    if (lists_empty()) {
        finish_with(Outcome::Exhausted);
        return;
    }

    FeatureVector features = compute_features(stats_, t_);
    FeatureDiff diff = t_ == 0 ? initial_diff(features) : feature_diff(prev_features_, features);
    size_t choice = 0;
    try {
        choice = policy.select(StepView{t_, features, diff, pending_reward_});
    } catch (const PolicyAbort &e) {
        finish_with(e.outcome());
        return;
    }
    if (choice >= lists_.size())
        throw out_of_range(policy.spec() + " selected list " + to_string(choice) + " of " +
                           to_string(lists_.size()));

    size_t used = choice;
    NodeId id = select_and_pop(choice, used);
    const State state = states_[id];
    if (task_.is_goal(state)) {
        int64_t cost = 0;
        result_.plan = extract_plan(id, cost);
        result_.cost = cost;
        finish_with(Outcome::Solved);
        return;
    }
    if (expansions_ >= budget_.max_expansions) {
        finish_with(Outcome::BudgetExceeded);
        return;
    }

    SearchNode &node = nodes_[id];
    node.expanded = true;
    for (size_t i = 0; i < lists_.size(); ++i) {
        if (node.h_values[i].is_finite())
            stats_[i].remove(node.h_values[i].value());
    }
    task_.successors(state, succ_buffer_);
    for (const Successor &s : succ_buffer_)
        insert_successor(s.state, id, s.op, s.cost);

    double reward = step_reward(StepKind::Expansion);
    TraceStep rec{t_, used, reward, {}};
    if (trace_mode_ == TraceMode::Full)
        rec.diff = move(diff);
    if (trace_mode_ != TraceMode::None)
        result_.trace.push_back(move(rec));
    ++expansions_;
    ++t_;
    prev_features_ = move(features);
    pending_reward_ = reward;
}

SearchResult SearchEngine::finish(ControlPolicy &policy) {
    FeatureVector features = compute_features(stats_, t_);
    FeatureDiff diff = t_ == 0 ? initial_diff(features) : feature_diff(prev_features_, features);
    result_.expansions = expansions_;
    result_.wall_time_ms = elapsed_seconds() * 1000.0;
    if (!done_)
        finish_with(Outcome::BudgetExceeded);
    policy.end_episode(StepView{t_, features, diff, pending_reward_}, result_.outcome);
    return result_;
}

SearchResult SearchEngine::run(ControlPolicy &policy) {
    begin(policy);
    while (!done_)
        step(policy);
    return finish(policy);
}

SearchResult run_gbfs(const Task &task, Portfolio &portfolio, ControlPolicy &policy, SearchBudget budget,
                      TraceMode trace_mode) {
    SearchEngine engine(task, portfolio, budget, trace_mode);
    return engine.run(policy);
}

string result_summary_json(const SearchResult &r, bool include_timing) {
    nlohmann::ordered_json j;
    j["outcome"] = outcome_name(r.outcome);
    j["expansions"] = r.expansions;
    j["generated"] = r.generated;
    if (r.solved())
        j["cost"] = r.cost;
    else
        j["cost"] = nullptr;
    if (include_timing)
        j["wall_time_ms"] = r.wall_time_ms;
    return j.dump();
}

namespace {
void append_double(string &out, double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}
}  // namespace

string trace_csv(const SearchResult &r) {
    string out = "t,chosen_h,reward";
    size_t stat_cols = kStatsPerHeuristic * r.num_heuristics;
    for (size_t i = 0; i < stat_cols; ++i)
        out += ",d" + to_string(i);
    out += '\n';
    for (const TraceStep &s : r.trace) {
        out += to_string(s.t) + ',' + to_string(s.chosen) + ',';
        append_double(out, s.reward);
        for (size_t i = 0; i < stat_cols; ++i) {
            out += ',';
            if (i < s.diff.values.size())
                append_double(out, s.diff.values[i]);
        }
        out += '\n';
    }
    return out;
}

vector<TraceRow> read_trace_csv(const string &text) {
    vector<TraceRow> rows;
    istringstream in(text);
    string line;
    size_t number = 0;
    while (getline(in, line)) {
        ++number;
        if (line.empty() || (number == 1 && line.rfind("t,", 0) == 0))
            continue;
        istringstream fields(line);
        string t, chosen, reward;
        if (!getline(fields, t, ',') || !getline(fields, chosen, ',') || !getline(fields, reward, ','))
            throw runtime_error("trace line " + to_string(number) + ": expected t,chosen_h,reward");
        try {
            rows.push_back({stoul(t), stoul(chosen), stod(reward)});
        } catch (const exception &) {
            throw runtime_error("trace line " + to_string(number) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace dhs
