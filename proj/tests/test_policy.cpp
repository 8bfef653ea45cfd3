#include "doctest.h"

#include "dhs/features.hpp"
#include "dhs/policy.hpp"
#include "dhs/search.hpp"
#include "dhs/taskgen.hpp"

#include <cmath>
#include <set>

using namespace std;
using namespace dhs;

namespace {

OpenListStats stats_of(vector<int64_t> values) {
    OpenListStats s;
    for (int64_t v : values)
        s.add(v);
    return s;
}

FeatureVector features_with_means(vector<vector<int64_t>> lists) {
    vector<OpenListStats> stats;
    for (auto &l : lists)
        stats.push_back(stats_of(l));
    return compute_features(stats, 3);
}

size_t select_once(ControlPolicy &p, const FeatureVector &f, size_t t) {
    FeatureDiff d = initial_diff(f);
    return p.select(StepView{t, f, d, -1.0});
}

}  // namespace

TEST_CASE("compute_features") {
    vector<OpenListStats> stats{stats_of({3, 5})};
    FeatureVector f = compute_features(stats, 7);
    CHECK(f.values().size() == 6);
    CHECK(f.max(0) == 5);
    CHECK(f.min(0) == 3);
    CHECK(f.mean(0) == 4);
    CHECK(f.variance(0) == 1);
    CHECK(f.count(0) == 2);
    CHECK(f.t() == 7);

    vector<OpenListStats> empty(2);
    FeatureVector z = compute_features(empty, 0);
    for (double v : z.values())
        CHECK(v == 0.0);
}

TEST_CASE("feature_diff") {
    FeatureVector a = features_with_means({{4}});
    FeatureVector b = features_with_means({{3}});
    FeatureDiff same = feature_diff(a, a);
    for (size_t i = 0; i + 1 < same.values.size(); ++i)
        CHECK(same.values[i] == 0.0);
    CHECK(same.values.back() == 3.0);
    CHECK(feature_diff(a, b).values[2] == -1.0);
    FeatureDiff first = initial_diff(b);
    CHECK(first.values == vector<double>{0, 0, 0, 0, 0, 3});
    CHECK_THROWS_AS(feature_diff(a, features_with_means({{1}, {2}})), DimensionMismatch);
}

TEST_CASE("reward is -1 per step and returns sum to -k") {
    CHECK(step_reward(StepKind::Expansion) == -1.0);
    CHECK(step_reward(StepKind::Terminal) == -1.0);
    ExplicitTask pi = gen_pi_n(6);
    Portfolio pf = make_portfolio(pi, {"tabular:0", "tabular:1"});
    SinglePolicy p(0);
    SearchResult r = run_gbfs(pi, pf, p);
    double ret = 0;
    for (const TraceStep &s : r.trace)
        ret += s.reward;
    CHECK(ret == -static_cast<double>(r.expansions));
}

TEST_CASE("alternation") {
    CHECK(alternation_select({0, 1, 2, 3}, 5) == 1);
    CHECK(alternation_select({3, 2, 1, 0}, 0) == 3);
    CHECK_THROWS(alternation_select({0, 0, 1}, 0));
    auto perms = all_permutations(4);
    CHECK(perms.size() == 24);
    CHECK(set<vector<size_t>>(perms.begin(), perms.end()).size() == 24);
    CHECK(all_permutations(1).size() == 1);
    CHECK(all_permutations(5).size() == 120);
}

TEST_CASE("argmin-mu") {
    ArgminMuPolicy p;
    p.begin_episode(2);
    CHECK(select_once(p, features_with_means({{3, 5}, {3, 4}}), 1) == 1);
    CHECK(select_once(p, features_with_means({{2, 4}, {3}}), 1) == 0);
    CHECK(select_once(p, features_with_means({{}, {9}}), 1) == 1);
    CHECK(select_once(p, features_with_means({{9}, {}}), 1) == 0);
    CHECK_THROWS(select_once(p, features_with_means({{}, {}}), 1));
}

TEST_CASE("argmin-mu is invariant under shifting all values") {
    mt19937_64 rng(8);
    uniform_int_distribution<int64_t> val(0, 30);
    for (int round = 0; round < 200; ++round) {
        vector<vector<int64_t>> lists(3), shifted(3);
        for (size_t i = 0; i < 3; ++i) {
            for (int k = 0; k < 1 + round % 5; ++k) {
                int64_t v = val(rng);
                lists[i].push_back(v);
                shifted[i].push_back(v + 17);
            }
        }
        CHECK(argmin_mu_select(features_with_means(lists)) == argmin_mu_select(features_with_means(shifted)));
    }
}

TEST_CASE("random policy is reproducible and roughly uniform") {
    const size_t n = 4, draws = 100000;
    RandomPolicy a(42), b(42);
    a.begin_episode(n);
    b.begin_episode(n);
    FeatureVector f(n);
    vector<double> counts(n, 0);
    vector<size_t> first;
    for (size_t t = 0; t < draws; ++t) {
        size_t x = select_once(a, f, t);
        CHECK(x < n);
        if (x != select_once(b, f, t))
            FAIL("random policies with the same seed diverged");
        counts[x] += 1;
        if (t < 50)
            first.push_back(x);
    }
    double expected = static_cast<double>(draws) / n, chi2 = 0;
    for (double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    // 3 degrees of freedom: P(chi2 > 16.27) = 0.001.
    CHECK(chi2 < 16.27);

    a.begin_episode(n);
    for (size_t t = 0; t < 50; ++t)
        CHECK(select_once(a, f, t) == first[t]);
}

TEST_CASE("scripted policy repeats its last entry") {
    ScriptedPolicy p({1, 0});
    p.begin_episode(2);
    FeatureVector f(2);
    CHECK(select_once(p, f, 0) == 1);
    CHECK(select_once(p, f, 1) == 0);
    CHECK(select_once(p, f, 5) == 0);
}

TEST_CASE("invalid policies are rejected") {
    SinglePolicy single(3);
    CHECK_THROWS_AS(single.begin_episode(2), InvalidPolicy);
    AlternationPolicy alt({0, 1, 2});
    CHECK_THROWS_AS(alt.begin_episode(2), InvalidPolicy);
    CHECK_THROWS_AS(lift_policy(ArgminMuPolicy()), InvalidPolicy);
}

TEST_CASE("make_policy parses the spec strings") {
    CHECK(make_policy("single:2")->spec() == "single:2");
    CHECK(make_policy("alt:3120")->spec() == "alt:3120");
    CHECK(make_policy("alt:0,1")->spec() == "alt:01");
    CHECK(make_policy("rnd:7")->spec() == "rnd:7");
    CHECK(make_policy("argmin-mu")->spec() == "argmin-mu");
    CHECK(make_policy("scripted:0110")->spec() == "scripted:0110");
    CHECK(make_policy("remote:127.0.0.1:9")->spec() == "remote:127.0.0.1:9");
    CHECK_THROWS_AS(make_policy("alt:012x"), InvalidPolicy);
    CHECK_THROWS_AS(make_policy("alt:013"), InvalidPolicy);
    CHECK_THROWS_AS(make_policy("best"), InvalidPolicy);
    CHECK_THROWS_AS(make_policy("single:"), InvalidPolicy);
    CHECK_THROWS_AS(make_policy("q:/nonexistent/model.json"), InvalidPolicy);
    CHECK_THROWS_AS(make_policy("remote:nohost"), InvalidPolicy);
}

TEST_CASE("lifted policies reproduce traces exactly") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        TransportInstance inst = gen_transport(4, 2, seed);
        vector<unique_ptr<ControlPolicy>> originals;
        for (size_t i = 0; i < 4; ++i)
            originals.push_back(make_unique<SinglePolicy>(i));
        originals.push_back(make_unique<AlternationPolicy>(vector<size_t>{2, 0, 3, 1}));
        for (auto &p : originals) {
            unique_ptr<ControlPolicy> lifted = lift_policy(*p);
            Portfolio pf1 = make_portfolio(inst.task, default_portfolio_names(inst.task));
            Portfolio pf2 = make_portfolio(inst.task, default_portfolio_names(inst.task));
            SearchResult a = run_gbfs(inst.task, pf1, *p);
            SearchResult b = run_gbfs(inst.task, pf2, *lifted);
            CHECK(trace_csv(a) == trace_csv(b));
            CHECK(a.expansions == b.expansions);
        }
    }
}

TEST_CASE("outcome names") {
    for (Outcome o : {Outcome::Solved, Outcome::Exhausted, Outcome::BudgetExceeded, Outcome::ControllerDisconnected,
                      Outcome::ProtocolError})
        CHECK(parse_outcome(outcome_name(o)) == o);
    CHECK(string(outcome_name(Outcome::Solved)) == "plan-found");
}
