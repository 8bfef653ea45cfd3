#include "doctest.h"

#include "dhs/dqn.hpp"
#include "dhs/search.hpp"
#include "dhs/taskgen.hpp"

#include <cmath>
#include <filesystem>

using namespace std;
using namespace dhs;

namespace {

/// Linear net with zero weights: Q is the bias vector whatever the input.
Mlp constant_net(size_t input, vector<double> q) {
    Mlp net({input, q.size()});
    auto p = net.params();
    for (size_t i = 0; i < q.size(); ++i)
        p[net.bias_offset(0) + i] = q[i];
    return net;
}

Transition make_transition(size_t a, bool done, size_t dim = 3) {
    return {vector<double>(dim, 0.0), a, -1.0, vector<double>(dim, 0.0), done};
}

}  // namespace

TEST_CASE("epsilon schedule") {
    TrainConfig c;
    c.epsilon_decay_steps = 1000;
    CHECK(epsilon_at(c, 0) == 1.0);
    CHECK(epsilon_at(c, 1000) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(epsilon_at(c, 500) == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(epsilon_at(c, 100000) == doctest::Approx(0.1).epsilon(1e-15));
    double prev = 2.0;
    for (size_t s = 0; s < 1500; s += 7) {
        CHECK(epsilon_at(c, s) <= prev);
        prev = epsilon_at(c, s);
    }
}

TEST_CASE("config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon_end = 1.5;
    CHECK_THROWS(c.validate());
    c = TrainConfig{};
    c.gamma = 1.1;
    CHECK_THROWS(c.validate());
    c = TrainConfig{};
    c.episode_cutoff = 0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("double DQN target") {
    Mlp online = constant_net(3, {1.0, 3.0});
    Mlp target = constant_net(3, {10.0, 4.0});
    CHECK(double_dqn_target(online, target, make_transition(0, true), 0.9) == -1.0);
    // online picks action 1, the target network evaluates it: -1 + 0.9 * 4
    CHECK(double_dqn_target(online, target, make_transition(0, false), 0.9) == doctest::Approx(2.6));
    // with identical networks the target is r + gamma * max Q
    CHECK(double_dqn_target(target, target, make_transition(0, false), 0.5) == doctest::Approx(4.0));
    CHECK_THROWS_AS(double_dqn_target(online, constant_net(3, {1.0, 2.0, 3.0}), make_transition(0, false), 0.9),
                    ShapeMismatch);
}

TEST_CASE("argmax breaks ties towards the lowest index") {
    CHECK(argmax(vector<double>{1, 3, 3}) == 1);
    CHECK(argmax(vector<double>{2, 2}) == 0);
}

TEST_CASE("replay buffer evicts FIFO and never exceeds its capacity") {
    ReplayBuffer buf(3, 1);
    CHECK_THROWS_AS(buf.sample_indices(1), logic_error);
    for (size_t a = 0; a < 5; ++a) {
        buf.push(make_transition(a, false));
        CHECK(buf.size() <= 3);
    }
    CHECK(buf.size() == 3);
    CHECK(buf[0].a == 2);
    CHECK(buf[1].a == 3);
    CHECK(buf[2].a == 4);
    CHECK_THROWS_AS(buf.sample_indices(4), logic_error);
}

TEST_CASE("replay sampling is uniform") {
    const size_t n = 10, draws = 100000;
    ReplayBuffer buf(n, 7);
    for (size_t i = 0; i < n; ++i)
        buf.push(make_transition(i, false));
    vector<double> counts(n, 0);
    for (size_t k = 0; k < draws / n; ++k) {
        for (size_t i : buf.sample_indices(n))
            counts[i] += 1;
    }
    double total = 0;
    for (double c : counts)
        total += c;
    double expected = total / n, chi2 = 0;
    for (double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    // 9 degrees of freedom: P(chi2 > 27.88) = 0.001.
    CHECK(chi2 < 27.88);
}

TEST_CASE("feature normalizer") {
    FeatureNormalizer norm(2);
    norm.update(vector<double>{1, 5});
    norm.update(vector<double>{3, 5});
    CHECK(norm.mean() == vector<double>{2, 5});
    vector<double> z = norm.apply(vector<double>{3, 7});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(2.0)); // zero spread falls back to scale 1
}

TEST_CASE("q policy acts greedily and checks the portfolio size") {
    QModel m;
    m.num_heuristics = 2;
    m.net = constant_net(feature_length(2), {0.5, 0.5});
    QPolicy p(m, "q:test");
    CHECK_THROWS_AS(p.begin_episode(3), InvalidPolicy);
    p.begin_episode(2);
    FeatureVector f(2);
    FeatureDiff d = initial_diff(f);
    CHECK(p.select(StepView{0, f, d, 0.0}) == 0);
}

TEST_CASE("model files round-trip exactly") {
    mt19937_64 rng(9);
    QModel m;
    m.num_heuristics = 2;
    m.net = Mlp({feature_length(2), 7, 2}, Activation::Tanh);
    m.net.initialize(rng);
    m.normalize = true;
    m.normalizer = FeatureNormalizer(feature_length(2));
    m.normalizer.update(vector<double>(feature_length(2), 0.1));
    m.normalizer.update(vector<double>(feature_length(2), 1.0 / 3.0));
    m.config_json = config_to_json(TrainConfig{});
    auto path = filesystem::temp_directory_path() / "dhs_test_model.json";
    save_model(m, path.string());
    QModel back = load_model(path.string());
    CHECK(back.net == m.net);
    CHECK(back.normalize);
    CHECK(back.normalizer.mean() == m.normalizer.mean());
    CHECK(back.normalizer.m2() == m.normalizer.m2());
    auto policy = make_policy("q:" + path.string());
    CHECK(policy->spec() == "q:" + path.string());
    filesystem::remove(path);
}

TEST_CASE("training with zero updates returns the initial policy") {
    vector<ArtificialInstance> inst{gen_artificial(5, 2, 1)};
    vector<const Task *> tasks{&inst[0].task};
    TrainConfig c;
    c.total_updates = 0;
    TrainResult r = train(tasks, {"tabular:0", "tabular:1"}, c);
    CHECK(r.curve.empty());
    CHECK(r.updates == 0);
    CHECK(r.incumbent.net.input_size() == feature_length(2));
    CHECK_THROWS(train({}, {"tabular:0"}, c));
}

TEST_CASE("training is deterministic and evaluates on its interval") {
    vector<ArtificialInstance> inst;
    for (uint64_t s = 0; s < 3; ++s)
        inst.push_back(gen_artificial(8, 2, s));
    vector<const Task *> tasks;
    for (auto &i : inst)
        tasks.push_back(&i.task);
    TrainConfig c;
    c.hidden = {16};
    c.total_updates = 700;
    c.warmup = 64;
    c.epsilon_decay_steps = 400;
    c.target_sync_interval = 100;
    c.eval_interval = 300;
    c.seed = 3;
    TrainResult a = train(tasks, {"tabular:0", "tabular:1"}, c);
    TrainResult b = train(tasks, {"tabular:0", "tabular:1"}, c);
    CHECK(a.updates == 700);
    REQUIRE(a.curve.size() == 3); // 300, 600 and the final 700
    CHECK(a.curve[0].update_step == 300);
    CHECK(a.curve[2].update_step == 700);
    CHECK(a.incumbent.net == b.incumbent.net);
    REQUIRE(b.curve.size() == a.curve.size());
    for (size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].total_expansions == b.curve[i].total_expansions);
        CHECK(a.curve[i].solved == b.curve[i].solved);
    }

    c.parallel_gradients = true;
    TrainResult p = train(tasks, {"tabular:0", "tabular:1"}, c);
    CHECK(p.incumbent.net == a.incumbent.net);

    // the incumbent is the best evaluation point
    size_t best = 0;
    for (size_t i = 1; i < a.curve.size(); ++i) {
        const EvalPoint &x = a.curve[i], &y = a.curve[best];
        if (x.solved > y.solved || (x.solved == y.solved && x.total_expansions < y.total_expansions))
            best = i;
    }
    EvalPoint again = evaluate_model(a.incumbent, tasks, {"tabular:0", "tabular:1"}, c.episode_cutoff);
    CHECK(again.total_expansions == a.curve[best].total_expansions);
}
