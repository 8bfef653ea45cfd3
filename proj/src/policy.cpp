#include "dhs/policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

using namespace std;

namespace dhs {

const char *outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Solved:
        return "plan-found";
    case Outcome::Exhausted:
        return "exhausted";
    case Outcome::BudgetExceeded:
        return "budget-exceeded";
    case Outcome::ControllerDisconnected:
        return "controller-disconnected";
    case Outcome::ProtocolError:
        return "protocol-error";
    }
    return "unknown";
}

Outcome parse_outcome(const string &name) {
    for (Outcome o : {Outcome::Solved, Outcome::Exhausted, Outcome::BudgetExceeded,
                      Outcome::ControllerDisconnected, Outcome::ProtocolError}) {
        if (name == outcome_name(o))
            return o;
    }
    throw invalid_argument("unknown outcome '" + name + "'");
}

namespace {
void check_permutation(const vector<size_t> &perm) {
    vector<size_t> sorted = perm;
    sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i)
            throw InvalidPolicy("alternation order is not a permutation of 0..n-1");
    }
    if (perm.empty())
        throw InvalidPolicy("alternation order is empty");
}
}  // namespace

size_t alternation_select(const vector<size_t> &perm, size_t t) {
    check_permutation(perm);
    return perm[t % perm.size()];
}

size_t argmin_mu_select(const FeatureVector &features) {
    size_t best = 0;
    bool found = false;
    for (size_t h = 0; h < features.num_heuristics(); ++h) {
        if (features.count(h) == 0)
            continue;
        if (!found || features.mean(h) < features.mean(best)) {
            best = h;
            found = true;
        }
    }
    if (!found)
        throw runtime_error("argmin-mu: every open list is empty");
    return best;
}

vector<vector<size_t>> all_permutations(size_t n) {
    vector<size_t> p(n);
    iota(p.begin(), p.end(), size_t{0});
    vector<vector<size_t>> out;
    do {
        out.push_back(p);
    } while (next_permutation(p.begin(), p.end()));
    return out;
}

void SinglePolicy::begin_episode(size_t n) {
    if (index_ >= n)
        throw InvalidPolicy("single:" + to_string(index_) + " exceeds portfolio size " + to_string(n));
    ControlPolicy::begin_episode(n);
}

AlternationPolicy::AlternationPolicy(vector<size_t> perm) : perm_(move(perm)) {
    check_permutation(perm_);
}

void AlternationPolicy::begin_episode(size_t n) {
    if (perm_.size() != n)
        throw InvalidPolicy(spec() + " does not match portfolio size " + to_string(n));
    ControlPolicy::begin_episode(n);
}

string AlternationPolicy::spec() const {
    string s = "alt:";
    for (size_t i : perm_)
        s += to_string(i);
    return s;
}

void RandomPolicy::begin_episode(size_t n) {
    ControlPolicy::begin_episode(n);
    rng_.seed(seed_);
}

size_t RandomPolicy::select(const StepView &) {
    uniform_int_distribution<size_t> dist(0, num_heuristics_ - 1);
    return dist(rng_);
}

ScriptedPolicy::ScriptedPolicy(vector<size_t> sequence) : sequence_(move(sequence)) {
    if (sequence_.empty())
        throw InvalidPolicy("scripted policy needs a nonempty sequence");
}

size_t ScriptedPolicy::select(const StepView &step) {
    return step.t < sequence_.size() ? sequence_[step.t] : sequence_.back();
}

string ScriptedPolicy::spec() const {
    string s = "scripted:";
    for (size_t i : sequence_)
        s += to_string(i);
    return s;
}

unique_ptr<ControlPolicy> lift_policy(const ControlPolicy &policy) {
    if (const auto *single = dynamic_cast<const SinglePolicy *>(&policy)) {
        size_t index = single->index();
        return make_unique<FeaturePolicy>([index](size_t, const FeatureVector &) { return index; },
                                          "lift(" + single->spec() + ")");
    }
    if (const auto *alt = dynamic_cast<const AlternationPolicy *>(&policy)) {
        vector<size_t> perm = alt->permutation();
        return make_unique<FeaturePolicy>(
            [perm](size_t t, const FeatureVector &) { return perm[t % perm.size()]; },
            "lift(" + alt->spec() + ")");
    }
    throw InvalidPolicy("only selection and alternation policies can be lifted, got " + policy.spec());
}

}  // namespace dhs
