#include "dhs/dqn.hpp"

#include "dhs/heuristics.hpp"
#include "dhs/search.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace std;
using json = nlohmann::ordered_json;

namespace dhs {

ReplayBuffer::ReplayBuffer(size_t capacity, uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0)
        throw invalid_argument("replay capacity must be positive");
    data_.reserve(min<size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition tr) {
    if (data_.size() < capacity_) {
        data_.push_back(move(tr));
    } else {
        data_[head_] = move(tr);
        head_ = (head_ + 1) % capacity_;
    }
}

const Transition &ReplayBuffer::operator[](size_t i) const {
    if (i >= data_.size())
        throw out_of_range("replay index " + to_string(i));
    return data_[(head_ + i) % data_.size()];
}

vector<size_t> ReplayBuffer::sample_indices(size_t k) {
    if (data_.size() < k || data_.empty())
        throw logic_error("replay buffer holds " + to_string(data_.size()) + " transitions, " +
                          to_string(k) + " requested");
    uniform_int_distribution<size_t> dist(0, data_.size() - 1);
    vector<size_t> out(k);
    for (size_t &i : out)
        i = dist(rng_);
    return out;
}

void TrainConfig::validate() const {
    if (!(0.0 <= epsilon_end && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
        throw invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
    if (!(0.0 <= gamma && gamma <= 1.0))
        throw invalid_argument("gamma must lie in [0, 1]");
    if (episode_cutoff == 0)
        throw invalid_argument("episode cutoff must be positive");
    if (batch_size == 0 || replay_capacity < batch_size)
        throw invalid_argument("batch size must be positive and fit in the replay buffer");
    if (target_sync_interval == 0 || eval_interval == 0)
        throw invalid_argument("sync and evaluation intervals must be positive");
    if (!(adam.learning_rate > 0.0))
        throw invalid_argument("learning rate must be positive");
}

double epsilon_at(const TrainConfig &config, size_t update_step) {
    if (config.epsilon_decay_steps == 0 || update_step >= config.epsilon_decay_steps)
        return config.epsilon_end;
    double frac = static_cast<double>(update_step) / static_cast<double>(config.epsilon_decay_steps);
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start);
}

size_t argmax(span<const double> q) {
    if (q.empty())
        throw ShapeMismatch("argmax of an empty vector");
    size_t best = 0;
    for (size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best])
            best = i;
    }
    return best;
}

double double_dqn_target(const Mlp &online, const Mlp &target, const Transition &tr, double gamma) {
    if (tr.done)
        return tr.r;
    if (online.layer_sizes() != target.layer_sizes())
        throw ShapeMismatch("online and target networks differ in shape");
    vector<double> q_online = online.forward(tr.s_next);
    vector<double> q_target = target.forward(tr.s_next);
    return tr.r + gamma * q_target[argmax(q_online)];
}

void FeatureNormalizer::update(span<const double> x) {
    if (x.size() != mean_.size())
        throw ShapeMismatch("normalizer input has wrong length");
    ++count_;
    for (size_t i = 0; i < x.size(); ++i) {
        double delta = x[i] - mean_[i];
        mean_[i] += delta / static_cast<double>(count_);
        m2_[i] += delta * (x[i] - mean_[i]);
    }
}

vector<double> FeatureNormalizer::stddev() const {
    vector<double> out(mean_.size(), 1.0);
    if (count_ < 2)
        return out;
    for (size_t i = 0; i < out.size(); ++i) {
        double sd = sqrt(m2_[i] / static_cast<double>(count_));
        out[i] = sd > 1e-8 ? sd : 1.0;
    }
    return out;
}

vector<double> FeatureNormalizer::apply(span<const double> x) const {
    if (x.size() != mean_.size())
        throw ShapeMismatch("normalizer input has wrong length");
    vector<double> sd = stddev();
    vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        out[i] = (x[i] - mean_[i]) / sd[i];
    return out;
}

void FeatureNormalizer::restore(size_t count, vector<double> mean, vector<double> m2) {
    if (mean.size() != m2.size())
        throw ShapeMismatch("normalizer mean/m2 length mismatch");
    count_ = count;
    mean_ = move(mean);
    m2_ = move(m2);
}

string config_to_json(const TrainConfig &c) {
    json j;
    j["hidden"] = c.hidden;
    j["activation"] = activation_name(c.activation);
    j["epsilon_start"] = c.epsilon_start;
    j["epsilon_end"] = c.epsilon_end;
    j["epsilon_decay_steps"] = c.epsilon_decay_steps;
    j["gamma"] = c.gamma;
    j["learning_rate"] = c.adam.learning_rate;
    j["adam_beta1"] = c.adam.beta1;
    j["adam_beta2"] = c.adam.beta2;
    j["adam_epsilon"] = c.adam.epsilon;
    j["batch_size"] = c.batch_size;
    j["replay_capacity"] = c.replay_capacity;
    j["warmup"] = c.warmup;
    j["target_sync_interval"] = c.target_sync_interval;
    j["total_updates"] = c.total_updates;
    j["episode_cutoff"] = c.episode_cutoff;
    j["eval_interval"] = c.eval_interval;
    j["normalize"] = c.normalize;
    j["seed"] = c.seed;
    return j.dump();
}

void save_model(const QModel &model, const string &path) {
    json j;
    j["format"] = "dhs-qpolicy";
    j["version"] = 1;
    j["num_heuristics"] = model.num_heuristics;
    j["layer_sizes"] = model.net.layer_sizes();
    j["activation"] = activation_name(model.net.activation());
    auto params = model.net.params();
    j["params"] = vector<double>(params.begin(), params.end());
    if (model.normalize) {
        j["normalizer"] = {{"count", model.normalizer.count()},
                           {"mean", model.normalizer.mean()},
                           {"m2", model.normalizer.m2()}};
    } else {
        j["normalizer"] = nullptr;
    }
    j["config"] = json::parse(model.config_json);
    ofstream out(path);
    if (!out)
        throw runtime_error("cannot write model file " + path);
    out << j.dump(1) << '\n';
}

QModel load_model(const string &path) {
    ifstream in(path);
    if (!in)
        throw runtime_error("cannot read model file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw runtime_error("model file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "dhs-qpolicy" || j.value("version", 0) != 1)
        throw runtime_error("model file " + path + ": unsupported format");
    QModel model;
    model.num_heuristics = j.at("num_heuristics").get<size_t>();
    model.net = Mlp(j.at("layer_sizes").get<vector<size_t>>(),
                    parse_activation(j.at("activation").get<string>()));
    vector<double> params = j.at("params").get<vector<double>>();
    if (params.size() != model.net.num_params())
        throw runtime_error("model file " + path + ": parameter count does not match the architecture");
    copy(params.begin(), params.end(), model.net.params().begin());
    if (model.net.input_size() != feature_length(model.num_heuristics) ||
        model.net.output_size() != model.num_heuristics)
        throw runtime_error("model file " + path + ": architecture does not match the portfolio size");
    if (!j.at("normalizer").is_null()) {
        const json &n = j["normalizer"];
        model.normalize = true;
        model.normalizer.restore(n.at("count").get<size_t>(), n.at("mean").get<vector<double>>(),
                                 n.at("m2").get<vector<double>>());
    }
    model.config_json = j.value("config", json::object()).dump();
    return model;
}

QPolicy::QPolicy(QModel model, string spec) : model_(move(model)), spec_(move(spec)) {}

void QPolicy::begin_episode(size_t n) {
    if (n != model_.num_heuristics)
        throw InvalidPolicy(spec_ + " was trained for " + to_string(model_.num_heuristics) +
                            " heuristics, portfolio has " + to_string(n));
    ControlPolicy::begin_episode(n);
}

size_t QPolicy::select(const StepView &step) {
    const vector<double> &x = step.diff.values;
    vector<double> q = model_.normalize ? model_.net.forward(model_.normalizer.apply(x)) : model_.net.forward(x);
    return argmax(q);
}

EvalPoint evaluate_model(const QModel &model, const vector<const Task *> &instances,
                         const vector<string> &portfolio, size_t cutoff) {
    const long long count = static_cast<long long>(instances.size());
    vector<SearchResult> results(instances.size());
    // Rollouts are independent; each owns its portfolio and policy copy.
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        Portfolio pf = make_portfolio(*instances[i], portfolio);
        QPolicy policy(model, "q:eval");
        SearchBudget budget;
        budget.max_expansions = cutoff;
        results[i] = run_gbfs(*instances[i], pf, policy, budget, TraceMode::None);
    }
    EvalPoint point{0, 0, instances.size(), 0};
    for (const SearchResult &r : results) {
        point.solved += r.solved() ? 1 : 0;
        point.total_expansions += r.expansions;
    }
    return point;
}

namespace {

class Trainer;

class TrainingPolicy : public ControlPolicy {
public:
    explicit TrainingPolicy(Trainer &trainer) : trainer_(trainer) {}
    void begin_episode(size_t n) override;
    size_t select(const StepView &step) override;
    void end_episode(const StepView &step, Outcome outcome) override;
    string spec() const override { return "q:training"; }

private:
    Trainer &trainer_;
    bool has_prev_ = false;
    vector<double> prev_s_;
    size_t prev_a_ = 0;
};

class Trainer {
public:
    Trainer(const vector<const Task *> &instances, const vector<string> &portfolio, const TrainConfig &config)
        : instances_(instances), portfolio_(portfolio), config_(config),
          replay_(config.replay_capacity, config.seed ^ 0x9e3779b97f4a7c15ULL),
          act_rng_(config.seed) {
        config_.validate();
        if (instances_.empty())
            throw invalid_argument("training needs at least one instance");
        for (const Task *task : instances_)
            train_portfolios_.push_back(make_portfolio(*task, portfolio_));
        num_heuristics_ = train_portfolios_.front().size();
        for (const Portfolio &pf : train_portfolios_) {
            if (pf.size() != num_heuristics_)
                throw invalid_argument("all training instances need the same portfolio size");
        }
        vector<size_t> sizes{feature_length(num_heuristics_)};
        sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
        sizes.push_back(num_heuristics_);
        online_ = Mlp(sizes, config_.activation);
        mt19937_64 init_rng(config_.seed + 1);
        online_.initialize(init_rng);
        target_ = online_;
        adam_ = Adam(online_.num_params(), config_.adam);
        grad_.assign(online_.num_params(), 0.0);
        normalizer_ = FeatureNormalizer(feature_length(num_heuristics_));
    }

    TrainResult run() {
        result_.incumbent = snapshot();
        if (config_.total_updates == 0)
            return result_;
        size_t episode = 0;
        size_t pushes_at_round_start = pushes_;
        while (updates_ < config_.total_updates) {
            size_t i = episode % instances_.size();
            SearchBudget budget;
            budget.max_expansions = config_.episode_cutoff;
            TrainingPolicy policy(*this);
            SearchEngine engine(*instances_[i], train_portfolios_[i], budget, TraceMode::None);
            engine.run(policy);
            ++episode;
            if (episode % instances_.size() == 0) {
                if (pushes_ == pushes_at_round_start)
                    throw runtime_error("training instances produce no transitions");
                pushes_at_round_start = pushes_;
            }
        }
        if (config_.total_updates % config_.eval_interval != 0)
            evaluate();
        result_.updates = updates_;
        result_.episodes = episode;
        return result_;
    }

    bool update_budget_left() const { return updates_ < config_.total_updates; }

    size_t act(span<const double> obs) {
        if (config_.normalize)
            normalizer_.update(obs);
        double eps = epsilon_at(config_, updates_);
        uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(act_rng_) < eps) {
            uniform_int_distribution<size_t> pick(0, num_heuristics_ - 1);
            return pick(act_rng_);
        }
        return argmax(online_.forward(input(obs)));
    }

    void observe(Transition tr) {
        replay_.push(move(tr));
        ++pushes_;
        if (replay_.size() < max(config_.warmup, config_.batch_size) || !update_budget_left())
            return;
        gradient_update();
        ++updates_;
        if (updates_ % config_.target_sync_interval == 0)
            target_ = online_;
        if (updates_ % config_.eval_interval == 0)
            evaluate();
    }

private:
    vector<double> input(span<const double> obs) const {
        if (config_.normalize)
            return normalizer_.apply(obs);
        return vector<double>(obs.begin(), obs.end());
    }

    void gradient_update() {
        vector<size_t> idx = replay_.sample_indices(config_.batch_size);
        vector<vector<double>> inputs(idx.size());
        vector<TdSample> batch;
        batch.reserve(idx.size());
        for (size_t k = 0; k < idx.size(); ++k) {
            const Transition &tr = replay_[idx[k]];
            Transition view{{}, tr.a, tr.r, {}, tr.done};
            if (!tr.done)
                view.s_next = input(tr.s_next);
            double y = double_dqn_target(online_, target_, view, config_.gamma);
            inputs[k] = input(tr.s);
            batch.push_back({inputs[k], tr.a, y});
        }
        if (config_.parallel_gradients)
            td_gradients_parallel(online_, batch, grad_);
        else
            td_gradients_serial(online_, batch, grad_);
        adam_.step(online_.params(), grad_);
    }

    QModel snapshot() const {
        QModel m;
        m.net = online_;
        m.num_heuristics = num_heuristics_;
        m.normalize = config_.normalize;
        m.normalizer = normalizer_;
        m.config_json = config_to_json(config_);
        return m;
    }

    void evaluate() {
        QModel candidate = snapshot();
        EvalPoint point = evaluate_model(candidate, instances_, portfolio_, config_.episode_cutoff);
        point.update_step = updates_;
        bool better = !has_incumbent_ || point.solved > best_.solved ||
                      (point.solved == best_.solved && point.total_expansions < best_.total_expansions);
        if (better) {
            has_incumbent_ = true;
            best_ = point;
            result_.incumbent = move(candidate);
        }
        result_.curve.push_back(point);
    }

    const vector<const Task *> &instances_;
    const vector<string> &portfolio_;
    TrainConfig config_;
    vector<Portfolio> train_portfolios_;
    size_t num_heuristics_ = 0;
    Mlp online_, target_;
    Adam adam_;
    vector<double> grad_;
    ReplayBuffer replay_;
    FeatureNormalizer normalizer_;
    mt19937_64 act_rng_;
    size_t updates_ = 0;
    size_t pushes_ = 0;
    bool has_incumbent_ = false;
    EvalPoint best_{};
    TrainResult result_;
};

void TrainingPolicy::begin_episode(size_t n) {
    ControlPolicy::begin_episode(n);
    has_prev_ = false;
}

size_t TrainingPolicy::select(const StepView &step) {
    if (!trainer_.update_budget_left())
        throw PolicyAbort(Outcome::BudgetExceeded, "update budget reached");
    const vector<double> &obs = step.diff.values;
    if (has_prev_)
        trainer_.observe({prev_s_, prev_a_, step_reward(StepKind::Expansion), obs, false});
    prev_a_ = trainer_.act(obs);
    prev_s_ = obs;
    has_prev_ = true;
    return prev_a_;
}

void TrainingPolicy::end_episode(const StepView &step, Outcome outcome) {
    // Truncated episodes drop their last pending transition.
    if (outcome == Outcome::Solved && has_prev_ && trainer_.update_budget_left())
        trainer_.observe({prev_s_, prev_a_, step_reward(StepKind::Terminal), step.diff.values, true});
    has_prev_ = false;
}

}  // namespace

TrainResult train(const vector<const Task *> &instances, const vector<string> &portfolio,
                  const TrainConfig &config) {
    Trainer trainer(instances, portfolio, config);
    return trainer.run();
}

}  // namespace dhs
