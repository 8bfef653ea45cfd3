// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 on any
// failure. Pass criterion numbers to run a subset.

#include "support.hpp"

#include "dhs/bridge.hpp"
#include "dhs/dqn.hpp"
#include "dhs/heuristics.hpp"
#include "dhs/metrics.hpp"
#include "dhs/mlp.hpp"
#include "dhs/search.hpp"
#include "dhs/taskgen.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

using namespace std;
using namespace dhs;

namespace {

struct Verdict {
    bool pass = true;
    string detail;
};

void fail(Verdict &v, const string &why) {
    if (v.pass)
        v.detail = why;
    v.pass = false;
}

SearchResult solve(const Task &task, const vector<string> &portfolio, ControlPolicy &policy,
                   SearchBudget budget = {}) {
    Portfolio pf = make_portfolio(task, portfolio);
    return run_gbfs(task, pf, policy, budget);
}

const vector<string> kTabular{"tabular:0", "tabular:1"};

/// Policies that act only on t over the two Pi_n lists: both singles and
/// both alternations.
vector<unique_ptr<ControlPolicy>> time_only_policies() {
    vector<unique_ptr<ControlPolicy>> out;
    out.push_back(make_unique<SinglePolicy>(0));
    out.push_back(make_unique<SinglePolicy>(1));
    for (const auto &perm : all_permutations(2))
        out.push_back(make_unique<AlternationPolicy>(perm));
    return out;
}

/// The trap instance for a time-only policy: swapped iff it picks h1 at t=1.
PiOrientation trap_orientation(ControlPolicy &p) {
    p.begin_episode(2);
    FeatureVector f(2);
    FeatureDiff d = initial_diff(f);
    return p.select(StepView{1, f, d, -1.0}) == 1 ? PiOrientation::Swapped : PiOrientation::Standard;
}

Verdict criterion_pi_n() {
    Verdict v;
    for (int n : {6, 8, 10, 12}) {
        const size_t trap = size_t{1} << (n - 2);
        for (PiOrientation o : {PiOrientation::Standard, PiOrientation::Swapped}) {
            ArgminMuPolicy argmin;
            size_t e = solve(gen_pi_n(n, o), kTabular, argmin).expansions;
            if (e != 2)
                fail(v, "argmin-mu on n=" + to_string(n) + " expanded " + to_string(e));
        }
        for (auto &p : time_only_policies()) {
            ExplicitTask pi = gen_pi_n(n, trap_orientation(*p));
            SearchResult r = solve(pi, kTabular, *p);
            if (!r.solved() || r.expansions != trap)
                fail(v, p->spec() + " on n=" + to_string(n) + " expanded " + to_string(r.expansions));
        }
    }
    v.detail = v.pass ? "argmin-mu 2, singles and alternations 2^(n-2) for n in {6,8,10,12}" : v.detail;
    return v;
}

Verdict criterion_pi_prime() {
    Verdict v;
    for (int n : {6, 8, 10, 12}) {
        const size_t trap = size_t{1} << (n - 2);
        ExplicitTask pi = gen_pi_prime_n(n);
        ArgminMuPolicy argmin;
        size_t e = solve(pi, kTabular, argmin).expansions;
        if (e != 3)
            fail(v, "argmin-mu on n=" + to_string(n) + " expanded " + to_string(e));
        for (size_t h : {0, 1}) {
            SinglePolicy single(h);
            size_t s = solve(pi, kTabular, single).expansions;
            if (s < trap)
                fail(v, single.spec() + " on n=" + to_string(n) + " expanded only " + to_string(s));
        }
    }
    v.detail = v.pass ? "argmin-mu 3, singles >= 2^(n-2) for n in {6,8,10,12}" : v.detail;
    return v;
}

Verdict criterion_lifting() {
    Verdict v;
    size_t runs = 0;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        TransportInstance inst = gen_transport(4 + static_cast<int>(seed % 4), 2 + static_cast<int>(seed % 3), seed);
        vector<string> names = default_portfolio_names(inst.task);
        vector<unique_ptr<ControlPolicy>> policies;
        for (size_t i = 0; i < names.size(); ++i)
            policies.push_back(make_unique<SinglePolicy>(i));
        for (const auto &perm : all_permutations(names.size()))
            policies.push_back(make_unique<AlternationPolicy>(perm));
        for (auto &p : policies) {
            unique_ptr<ControlPolicy> lifted = lift_policy(*p);
            SearchResult a = solve(inst.task, names, *p);
            SearchResult b = solve(inst.task, names, *lifted);
            ++runs;
            if (trace_csv(a) != trace_csv(b) || result_summary_json(a, false) != result_summary_json(b, false))
                fail(v, "trace differs for " + p->spec() + " on transport seed " + to_string(seed));
        }
    }
    v.detail = v.pass ? to_string(runs) + " lifted runs bit-identical on 50 transport tasks" : v.detail;
    return v;
}

HeuristicValue oracle_value(int64_t x) {
    return x == testing::kOracleInf ? HeuristicValue::infinity() : HeuristicValue(x);
}

Verdict criterion_heuristics() {
    Verdict v;
    mt19937_64 rng(4242);
    size_t tasks = 0, states = 0;
    while (tasks < 200) {
        testing::RandomTaskOptions opts;
        opts.min_vars = 4;
        opts.max_vars = 8;
        opts.max_domain = 5;
        opts.min_ops = 8;
        opts.max_ops = 30;
        opts.unit_cost = tasks % 2 == 0;
        SasTask task = testing::random_sas_task(rng, opts);
        vector<State> reachable = testing::reachable_states(task, 10000);
        if (reachable.empty())
            continue;
        ++tasks;
        HMaxHeuristic hmax(task);
        HAddHeuristic hadd(task);
        FFHeuristic ff(task);
        PerfectHeuristic perfect(task);
        for (const State &s : reachable) {
            ++states;
            HeuristicValue vmax = hmax.evaluate(s), vadd = hadd.evaluate(s), vff = ff.evaluate(s);
            if (vmax != oracle_value(testing::naive_relaxed_cost(task, s, false)))
                fail(v, "h_max differs from the oracle on task " + to_string(tasks));
            if (vadd != oracle_value(testing::naive_relaxed_cost(task, s, true)))
                fail(v, "h_add differs from the oracle on task " + to_string(tasks));
            if (!(vmax <= vff && vff <= vadd))
                fail(v, "h_max <= h_ff <= h_add violated on task " + to_string(tasks));
            if (vff.is_finite() && testing::relaxed_plan_cost(task, s, ff.last_relaxed_plan()) != vff.value())
                fail(v, "invalid relaxed plan on task " + to_string(tasks));
            if (opts.unit_cost && !(vmax <= perfect.evaluate(s)))
                fail(v, "h_max exceeds h* on task " + to_string(tasks));
        }
    }
    v.detail = v.pass ? "200 tasks, " + to_string(states) + " states checked" : v.detail;
    return v;
}

vector<double> random_vector(mt19937_64 &rng, size_t n) {
    normal_distribution<double> d(0.0, 1.0);
    vector<double> x(n);
    for (double &e : x)
        e = d(rng);
    return x;
}

Verdict criterion_gradients() {
    Verdict v;
    mt19937_64 rng(5);
    double worst = 0.0;
    for (int pair = 0; pair < 50; ++pair) {
        Activation act = pair % 2 ? Activation::Tanh : Activation::Relu;
        Mlp net({11, 12, 9, 3}, act);
        normal_distribution<double> param(0.0, 0.5);
        for (double &x : net.params())
            x = param(rng);
        vector<vector<double>> xs;
        vector<TdSample> batch;
        for (int i = 0; i < 8; ++i)
            xs.push_back(random_vector(rng, 11));
        for (int i = 0; i < 8; ++i)
            batch.push_back({xs[i], static_cast<size_t>(i % 3), random_vector(rng, 1)[0]});
        vector<double> grad(net.num_params());
        td_gradients_serial(net, batch, grad);
        auto p = net.params();
        double num = 0, den = 0;
        for (size_t k = 0; k < p.size(); ++k) {
            const double h = 1e-5, orig = p[k];
            p[k] = orig + h;
            double up = td_loss(net, batch);
            p[k] = orig - h;
            double down = td_loss(net, batch);
            p[k] = orig;
            double fd = (up - down) / (2 * h);
            num += (grad[k] - fd) * (grad[k] - fd);
            den += grad[k] * grad[k] + fd * fd;
        }
        double rel = den > 0 ? sqrt(num / den) : 0.0;
        worst = max(worst, rel);
    }
    if (worst >= 1e-4)
        fail(v, "finite-difference relative error " + to_string(worst));

    AdamConfig cfg;
    Adam adam(5, cfg);
    vector<double> params(5, 0.0), g{0.3, -2.0, 1e-3, 50.0, -1e-6};
    adam.step(params, g);
    double adam_err = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        // m = (1-b1) g, v = (1-b2) g^2, bias-corrected: m^ = g, v^ = g^2
        double expected = -cfg.learning_rate * g[i] / (fabs(g[i]) + cfg.epsilon);
        adam_err = max(adam_err, fabs(params[i] - expected));
    }
    if (adam_err >= 1e-10)
        fail(v, "Adam first step off by " + to_string(adam_err));
    if (v.pass) {
        char buf[128];
        snprintf(buf, sizeof(buf), "worst FD rel. error %.2e over 50 pairs, Adam error %.1e", worst, adam_err);
        v.detail = buf;
    }
    return v;
}

double mean_expansions(const vector<const Task *> &tasks, const function<unique_ptr<ControlPolicy>(size_t)> &make) {
    double total = 0;
    for (size_t i = 0; i < tasks.size(); ++i) {
        unique_ptr<ControlPolicy> p = make(i);
        SearchBudget budget;
        budget.max_expansions = 7500;
        total += static_cast<double>(solve(*tasks[i], kTabular, *p, budget).expansions);
    }
    return total / static_cast<double>(tasks.size());
}

Verdict criterion_learning() {
    Verdict v;
    vector<ArtificialInstance> train_set, held_out;
    for (uint64_t i = 0; i < 30; ++i)
        train_set.push_back(gen_artificial(50, 3, 1000 + i));
    for (uint64_t i = 0; i < 10; ++i)
        held_out.push_back(gen_artificial(50, 3, 5000 + i));
    vector<const Task *> train_tasks, test_tasks;
    for (auto &a : train_set)
        train_tasks.push_back(&a.task);
    for (auto &a : held_out)
        test_tasks.push_back(&a.task);

    double optimal = mean_expansions(test_tasks, [&](size_t i) {
        return make_unique<ScriptedPolicy>(held_out[i].witness);
    });
    double alternation = numeric_limits<double>::infinity();
    for (const auto &perm : all_permutations(2)) {
        alternation = min(alternation, mean_expansions(test_tasks, [&](size_t) {
                                           return make_unique<AlternationPolicy>(perm);
                                       }));
    }

    const vector<uint64_t> seeds{1, 2, 3, 4, 5};
    vector<double> learned(seeds.size());
    const long long count = static_cast<long long>(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < count; ++k) {
        TrainConfig c;
        c.total_updates = 200000;
        c.epsilon_decay_steps = 100000;
        c.eval_interval = 30000;
        c.seed = seeds[k];
        TrainResult r = train(train_tasks, kTabular, c);
        EvalPoint e = evaluate_model(r.incumbent, test_tasks, kTabular, c.episode_cutoff);
        learned[k] = static_cast<double>(e.total_expansions) / static_cast<double>(test_tasks.size());
    }
    vector<double> sorted = learned;
    sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    size_t close = static_cast<size_t>(count_if(learned.begin(), learned.end(),
                                                [&](double x) { return x <= 2.0 * optimal; }));
    if (!(median < alternation))
        fail(v, "median " + to_string(median) + " not below alternation " + to_string(alternation));
    if (close < 3)
        fail(v, "only " + to_string(close) + " of 5 seeds within 2x optimal");
    ostringstream out;
    out.precision(4);
    out << "seeds";
    for (double x : learned)
        out << " " << x;
    out << "; median " << median << ", alternation " << alternation << ", optimal " << optimal << ", " << close
        << "/5 within 2x";
    if (v.pass)
        v.detail = out.str();
    else
        v.detail += " (" + out.str() + ")";
    return v;
}

Verdict criterion_metrics() {
    Verdict v;
    auto expect = [&](const char *what, double got, double want) {
        if (fabs(got - want) > 1e-12)
            fail(v, string(what) + " = " + to_string(got));
    };
    expect("guidance(1)", guidance_score(1, true), 1.0);
    expect("guidance(1e6)", guidance_score(1000000, true), 0.0);
    expect("guidance(1e3)", guidance_score(1000, true), 0.5);
    expect("speed(1s)", speed_score(1.0, true), 1.0);
    expect("speed(300s)", speed_score(300.0, true), 0.0);
    expect("quality(c,c)", quality_score(7.0, 7.0), 1.0);
    expect("quality(2c,c)", quality_score(14.0, 7.0), 0.5);
    bool runs[] = {true, false};
    expect("coverage(1 of 2)", coverage(runs), 0.5);
    if (v.pass)
        v.detail = "guidance, speed, quality and coverage examples exact";
    return v;
}

Verdict criterion_stats() {
    Verdict v;
    mt19937_64 rng(8);
    size_t steps = 0;
    for (int round = 0; round < 100; ++round) {
        testing::RandomTaskOptions opts;
        opts.min_vars = 5;
        opts.max_vars = 9;
        opts.max_domain = 5;
        opts.min_ops = 10;
        opts.max_ops = 40;
        opts.max_goal = 5;
        SasTask task = testing::random_sas_task(rng, opts);
        vector<string> names = default_portfolio_names(task);
        Portfolio pf = make_portfolio(task, names);
        SearchEngine engine(task, pf);
        RandomPolicy policy(static_cast<uint64_t>(round));
        engine.begin(policy);
        while (!engine.done()) {
            vector<OpenListStats> incremental(engine.stats().begin(), engine.stats().end());
            if (incremental != engine.recompute_stats())
                fail(v, "stats drift on search " + to_string(round) + " at step " + to_string(engine.expansions()));
            engine.step(policy);
            ++steps;
        }
        engine.finish(policy);

        string first, second;
        for (string *out : {&first, &second}) {
            RandomPolicy p(static_cast<uint64_t>(round));
            SearchResult r = solve(task, names, p);
            *out = result_summary_json(r, false) + trace_csv(r);
        }
        if (first != second)
            fail(v, "rerun of search " + to_string(round) + " differs");
    }
    if (v.pass)
        v.detail = "100 searches, " + to_string(steps) + " steps exact; reruns byte-identical";
    return v;
}

Verdict criterion_bridge() {
    Verdict v;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        TransportInstance inst = gen_transport(5, 3, 100 + seed);
        vector<string> names = default_portfolio_names(inst.task);
        vector<size_t> perm = all_permutations(names.size())[seed * 5 % 24];
        AlternationPolicy local(perm), controller_policy(perm);
        SearchResult expected = solve(inst.task, names, local);

        Listener listener(Endpoint{"127.0.0.1", 0});
        thread controller([&] {
            try {
                Connection conn = listener.accept(30.0);
                run_controller(conn, controller_policy);
            } catch (const exception &) {
            }
        });
        unique_ptr<ControlPolicy> remote = remote_policy(Endpoint{"127.0.0.1", listener.port()}, 30.0);
        SearchResult got = solve(inst.task, names, *remote);
        controller.join();
        if (trace_csv(got) != trace_csv(expected) || got.outcome != expected.outcome)
            fail(v, "remote trace differs on transport seed " + to_string(100 + seed));
    }
    if (v.pass)
        v.detail = "10 transport tasks, remote alternation traces identical";
    return v;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"acceptance gate"};
    vector<int> only;
    app.add_option("criteria", only, "criterion numbers to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    vector<pair<string, function<Verdict()>>> criteria{
        {"Pi_n exact expansion counts", criterion_pi_n},
        {"Pi'_n exact expansion counts", criterion_pi_prime},
        {"policy lifting preserves traces", criterion_lifting},
        {"heuristic oracles", criterion_heuristics},
        {"gradient and optimizer checks", criterion_gradients},
        {"learning on the artificial domain", criterion_learning},
        {"metric formulas", criterion_metrics},
        {"statistics exactness and determinism", criterion_stats},
        {"bridge transparency", criterion_bridge},
    };
    set<int> selected(only.begin(), only.end());
    bool all_pass = true;
    for (size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.count(id))
            continue;
        auto start = chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const exception &e) {
            v = {false, string("exception: ") + e.what()};
        }
        double secs = chrono::duration<double>(chrono::steady_clock::now() - start).count();
        printf("%s %d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str(),
               secs);
        fflush(stdout);
        all_pass &= v.pass;
    }
    return all_pass ? 0 : 1;
}
