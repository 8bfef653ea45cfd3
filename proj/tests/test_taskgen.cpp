#include "doctest.h"

#include "dhs/search.hpp"
#include "dhs/taskgen.hpp"

using namespace std;
using namespace dhs;

namespace {

SearchResult solve(const ExplicitTask &task, ControlPolicy &policy) {
    Portfolio pf = make_portfolio(task, {"tabular:0", "tabular:1"});
    return run_gbfs(task, pf, policy);
}

vector<size_t> choices(const SearchResult &r) {
    vector<size_t> out;
    for (const TraceStep &s : r.trace)
        out.push_back(s.chosen);
    return out;
}

}  // namespace

TEST_CASE("Pi_n sizes") {
    CHECK_THROWS(gen_pi_n(3));
    for (int n = 4; n <= 16; ++n) {
        size_t expected_cluster = (size_t{1} << (n - 2)) - 3;
        CHECK(pi_cluster_size(n) == expected_cluster);
        ExplicitTask pi = gen_pi_n(n);
        CHECK(static_cast<size_t>(pi.num_states()) == 4 + expected_cluster);
        CHECK(pi.arcs(3).size() == expected_cluster);
        CHECK(pi.goal_states() == vector<int>{2});
    }
}

TEST_CASE("Pi_n expansion counts per policy") {
    for (int n = 4; n <= 12; ++n) {
        const size_t trap = size_t{1} << (n - 2);
        ExplicitTask pi = gen_pi_n(n);
        ArgminMuPolicy argmin;
        SinglePolicy s0(0), s1(1);
        AlternationPolicy a01({0, 1}), a10({1, 0});
        CHECK(solve(pi, argmin).expansions == 2);
        CHECK(solve(pi, s0).expansions == trap);
        CHECK(solve(pi, a10).expansions == trap);
        CHECK(solve(pi, s1).expansions == 2);
        CHECK(solve(pi, a01).expansions == 2);

        // The swapped variant traps the policies that pick h1 at t = 1.
        ExplicitTask sw = gen_pi_n(n, PiOrientation::Swapped);
        CHECK(solve(sw, argmin).expansions == 2);
        CHECK(solve(sw, s0).expansions == 2);
        CHECK(solve(sw, a10).expansions == 2);
        CHECK(solve(sw, s1).expansions == trap);
        CHECK(solve(sw, a01).expansions == trap);
    }
}

TEST_CASE("Pi'_n needs three argmin-mu expansions") {
    for (int n = 4; n <= 12; ++n) {
        const size_t trap = size_t{1} << (n - 2);
        ExplicitTask pi = gen_pi_prime_n(n);
        CHECK(static_cast<size_t>(pi.num_states()) == 5 + pi_cluster_size(n));
        ArgminMuPolicy argmin;
        SearchResult r = solve(pi, argmin);
        CHECK(r.expansions == 3);
        CHECK(r.cost == 3);
        CHECK(choices(r) == vector<size_t>{0, 1, 0});
        SinglePolicy s0(0), s1(1);
        CHECK(solve(pi, s0).expansions >= trap);
        CHECK(solve(pi, s1).expansions >= trap);
    }
}

TEST_CASE("artificial instances") {
    CHECK_THROWS(gen_artificial(0, 2, 1));
    CHECK_THROWS(gen_artificial(3, 1, 1));
    bool some_single_worse = false;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const int depth = 12;
        ArtificialInstance a = gen_artificial(depth, 3, seed);
        ArtificialInstance b = gen_artificial(depth, 3, seed);
        CHECK(a.witness == b.witness);
        CHECK(a.task.num_arcs() == b.task.num_arcs());
        CHECK(a.task.num_states() == 1 + depth * 4);
        CHECK(a.witness.size() == static_cast<size_t>(depth) + 1);

        ScriptedPolicy witness(a.witness);
        SearchResult r = solve(a.task, witness);
        CHECK(r.solved());
        CHECK(r.expansions == static_cast<size_t>(depth));
        CHECK(r.cost == depth);

        for (size_t h : {0, 1}) {
            SinglePolicy single(h);
            SearchResult s = solve(a.task, single);
            CHECK(s.solved());
            CHECK(s.expansions >= static_cast<size_t>(depth));
            some_single_worse |= s.expansions > static_cast<size_t>(depth);
        }
    }
    CHECK(some_single_worse);
}

TEST_CASE("transport witness plans are valid and instances deterministic") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TransportInstance a = gen_transport(5, 3, seed);
        TransportInstance b = gen_transport(5, 3, seed);
        CHECK(a.witness.operators == b.witness.operators);
        CHECK(validate_plan(a.task, a.witness) == static_cast<int64_t>(a.witness.operators.size()));
    }
}
