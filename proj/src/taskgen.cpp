#include "dhs/taskgen.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <random>
#include <stdexcept>

using namespace std;

namespace dhs {
namespace {

void check_pi_n(int n) {
    if (n < 4)
        throw invalid_argument("Pi_n needs n >= 4, got " + to_string(n));
    if (n > 30)
        throw invalid_argument("Pi_n with n > 30 does not fit in memory");
}

void set_pair(ExplicitTask &task, int state, int h0, int h1, PiOrientation orientation) {
    if (orientation == PiOrientation::Swapped)
        swap(h0, h1);
    task.set_heuristic(0, state, HeuristicValue(h0));
    task.set_heuristic(1, state, HeuristicValue(h1));
}

ExplicitTask build_pi(int n, bool prime, PiOrientation orientation) {
    check_pi_n(n);
    const int cluster = static_cast<int>(pi_cluster_size(n));
    const int first_cluster = prime ? 5 : 4;
    ExplicitTask task(first_cluster + cluster, 0, {2});
    task.add_arc(0, "o1", 1, 1);
    task.add_arc(0, "o3", 1, 3);
    if (prime) {
        task.add_arc(1, "o2", 1, 4);
        task.add_arc(4, "o2'", 1, 2);
    } else {
        task.add_arc(1, "o2", 1, 2);
    }
    for (int k = 0; k < cluster; ++k)
        task.add_arc(3, "o" + to_string(4 + k), 1, first_cluster + k);

    set_pair(task, 0, 5, 6, orientation);
    set_pair(task, 1, 5, 3, orientation);
    set_pair(task, 2, 0, 0, orientation);
    set_pair(task, 3, 3, 4, orientation);
    if (prime)
        set_pair(task, 4, 2, 10, orientation);
    for (int k = 0; k < cluster; ++k)
        set_pair(task, first_cluster + k, 1, 1, orientation);
    return task;
}

}  // namespace

size_t pi_cluster_size(int n) {
    check_pi_n(n);
    return (size_t{1} << (n - 2)) - 3;
}

ExplicitTask gen_pi_n(int n, PiOrientation orientation) {
    return build_pi(n, false, orientation);
}

ExplicitTask gen_pi_prime_n(int n, PiOrientation orientation) {
    return build_pi(n, true, orientation);
}

ArtificialInstance gen_artificial(int depth, int branching, uint64_t seed) {
    if (depth < 1 || branching < 2)
        throw invalid_argument("artificial domain needs depth >= 1 and branching >= 2");
    // Values for a successor r steps from the goal. The informative list has
    // the on-path state strictly first; the misleading list puts the layer's
    // distractors below it and below every older entry.
    constexpr int kDistractorGap = 10;
    mt19937_64 rng(seed);
    bernoulli_distribution coin(0.5);

    const int num_states = 1 + depth * (1 + branching);
    int goal = -1;
    // Step 0 expands the root from either list; step l+1 needs the list that
    // is informative for layer l.
    vector<size_t> witness{0};
    struct Pending {
        int source, target;
    };
    vector<Pending> arcs;
    vector<array<int, 2>> values(num_states);
    values[0] = {2 * depth + 2, 2 * depth + 2};

    int next_id = 1;
    int path = 0;
    for (int layer = 0; layer < depth; ++layer) {
        size_t informative = coin(rng) ? 1 : 0;
        size_t misleading = 1 - informative;
        witness.push_back(informative);
        int r = depth - (layer + 1);

        int on_path = next_id++;
        vector<int> succ{on_path};
        for (int j = 0; j < branching; ++j)
            succ.push_back(next_id++);
        if (r == 0) {
            values[on_path] = {0, 0};
            goal = on_path;
        } else {
            values[on_path][informative] = 2 * r + 2;
            values[on_path][misleading] = 2 * r + 3;
        }
        for (size_t j = 1; j < succ.size(); ++j) {
            values[succ[j]][informative] = 2 * r + 2 + kDistractorGap;
            values[succ[j]][misleading] = 2 * r + 1;
        }
        shuffle(succ.begin(), succ.end(), rng);
        for (int s : succ)
            arcs.push_back({path, s});
        path = on_path;
    }

    ExplicitTask task(num_states, 0, {goal});
    for (size_t i = 0; i < arcs.size(); ++i)
        task.add_arc(arcs[i].source, "a" + to_string(arcs[i].target), 1, arcs[i].target);
    for (int s = 0; s < num_states; ++s) {
        task.set_heuristic(0, s, HeuristicValue(values[s][0]));
        task.set_heuristic(1, s, HeuristicValue(values[s][1]));
    }
    return {move(task), move(witness)};
}

TransportInstance gen_transport(int locations, int packages, uint64_t seed) {
    if (locations < 1 || packages < 1)
        throw invalid_argument("transport needs at least one location and one package");
    mt19937_64 rng(seed);
    uniform_int_distribution<int> loc(0, locations - 1);
    bernoulli_distribution extra_road(0.3);

    vector<vector<char>> road(locations, vector<char>(locations, 0));
    for (int a = 0; a + 1 < locations; ++a)
        road[a][a + 1] = road[a + 1][a] = 1;
    for (int a = 0; a < locations; ++a) {
        for (int b = a + 2; b < locations; ++b) {
            if (extra_road(rng))
                road[a][b] = road[b][a] = 1;
        }
    }

    const int truck = 0;
    const int in_truck = locations;
    vector<int> domains{locations};
    for (int p = 0; p < packages; ++p)
        domains.push_back(locations + 1);

    State init;
    init.values.push_back(loc(rng));
    vector<int> origin, destination;
    for (int p = 0; p < packages; ++p) {
        origin.push_back(loc(rng));
        destination.push_back(loc(rng));
        init.values.push_back(origin.back());
    }

    vector<Operator> ops;
    vector<vector<int>> drive_op(locations, vector<int>(locations, -1));
    for (int a = 0; a < locations; ++a) {
        for (int b = 0; b < locations; ++b) {
            if (!road[a][b])
                continue;
            drive_op[a][b] = static_cast<int>(ops.size());
            ops.push_back({"drive-l" + to_string(a) + "-l" + to_string(b), PartialAssignment({{truck, a}}),
                           PartialAssignment({{truck, b}}), 1});
        }
    }
    vector<vector<int>> load_op(packages, vector<int>(locations)), unload_op = load_op;
    for (int p = 0; p < packages; ++p) {
        int var = 1 + p;
        for (int l = 0; l < locations; ++l) {
            load_op[p][l] = static_cast<int>(ops.size());
            ops.push_back({"load-p" + to_string(p) + "-l" + to_string(l),
                           PartialAssignment({{truck, l}, {var, l}}), PartialAssignment({{var, in_truck}}), 1});
            unload_op[p][l] = static_cast<int>(ops.size());
            ops.push_back({"unload-p" + to_string(p) + "-l" + to_string(l),
                           PartialAssignment({{truck, l}, {var, in_truck}}), PartialAssignment({{var, l}}), 1});
        }
    }

    vector<Fact> goal_facts;
    for (int p = 0; p < packages; ++p)
        goal_facts.push_back({1 + p, destination[p]});

    // Witness: deliver packages one by one along shortest drives.
    auto drive = [&](int from, int to, Plan &plan) {
        vector<int> prev(locations, -1);
        deque<int> queue{from};
        prev[from] = from;
        while (!queue.empty()) {
            int a = queue.front();
            queue.pop_front();
            for (int b = 0; b < locations; ++b) {
                if (road[a][b] && prev[b] < 0) {
                    prev[b] = a;
                    queue.push_back(b);
                }
            }
        }
        vector<int> route;
        for (int x = to; x != from; x = prev[x])
            route.push_back(x);
        reverse(route.begin(), route.end());
        int at = from;
        for (int x : route) {
            plan.operators.push_back(static_cast<size_t>(drive_op[at][x]));
            at = x;
        }
    };
    Plan witness;
    int at = init.values[truck];
    for (int p = 0; p < packages; ++p) {
        if (origin[p] == destination[p])
            continue;
        drive(at, origin[p], witness);
        witness.operators.push_back(static_cast<size_t>(load_op[p][origin[p]]));
        drive(origin[p], destination[p], witness);
        witness.operators.push_back(static_cast<size_t>(unload_op[p][destination[p]]));
        at = destination[p];
    }

    return {SasTask(move(domains), move(init), move(ops), PartialAssignment(move(goal_facts))), move(witness)};
}

}  // namespace dhs
