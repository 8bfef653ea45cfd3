#include "dhs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

using namespace std;

namespace dhs {
namespace {

double clamp01(double x) {
    return min(1.0, max(0.0, x));
}

}  // namespace

double guidance_score(size_t expansions, bool solved) {
    if (!solved || expansions > 1000000)
        return 0.0;
    if (expansions <= 1)
        return 1.0;
    return clamp01(1.0 - log10(static_cast<double>(expansions)) / 6.0);
}

double speed_score(double seconds, bool solved) {
    if (!solved || seconds >= 300.0)
        return 0.0;
    if (seconds <= 1.0)
        return 1.0;
    return clamp01(1.0 - log(seconds) / log(300.0));
}

double quality_score(optional<double> cost, double best_cost) {
    if (!cost)
        return 0.0;
    if (*cost == 0.0)
        return best_cost == 0.0 ? 1.0 : 0.0;
    return clamp01(best_cost / *cost);
}

double coverage(span<const bool> solved) {
    if (solved.empty())
        throw invalid_argument("coverage needs at least one run");
    size_t count = static_cast<size_t>(std::count(solved.begin(), solved.end(), true));
    return static_cast<double>(count) / static_cast<double>(solved.size());
}

vector<double> best_as(const vector<vector<double>> &scores) {
    if (scores.empty())
        throw invalid_argument("best_as needs at least one member strategy");
    vector<double> best = scores.front();
    for (const vector<double> &member : scores) {
        if (member.size() != best.size())
            throw invalid_argument("member strategies cover different instance sets");
        for (size_t i = 0; i < best.size(); ++i)
            best[i] = max(best[i], member[i]);
    }
    return best;
}

vector<vector<double>> usage_quarters(span<const size_t> choices, size_t num_heuristics) {
    if (choices.size() < 4)
        throw TraceTooShort("usage quarters need at least 4 steps, trace has " + to_string(choices.size()));
    vector<vector<double>> out(4, vector<double>(num_heuristics, 0.0));
    size_t base = choices.size() / 4, extra = choices.size() % 4;
    size_t pos = 0;
    for (size_t q = 0; q < 4; ++q) {
        size_t len = base + (q < extra ? 1 : 0);
        for (size_t i = 0; i < len; ++i, ++pos) {
            if (choices[pos] >= num_heuristics)
                throw out_of_range("trace selects heuristic " + to_string(choices[pos]));
            out[q][choices[pos]] += 1.0;
        }
        for (double &f : out[q])
            f /= static_cast<double>(len);
    }
    return out;
}

vector<size_t> run_lengths(span<const size_t> choices) {
    vector<size_t> runs;
    for (size_t i = 0; i < choices.size(); ++i) {
        if (i > 0 && choices[i] == choices[i - 1])
            ++runs.back();
        else
            runs.push_back(1);
    }
    return runs;
}

SwitchHistogram switch_frequency(span<const size_t> choices) {
    SwitchHistogram h;
    if (choices.empty())
        return h;
    for (size_t len : run_lengths(choices)) {
        double mass = static_cast<double>(len);
        if (len == 1)
            h.immediate += mass;
        else if (len <= 100)
            h.high += mass;
        else if (len <= 1000)
            h.medium += mass;
        else
            h.low += mass;
    }
    double total = static_cast<double>(choices.size());
    h.immediate /= total;
    h.high /= total;
    h.medium /= total;
    h.low /= total;
    return h;
}

}  // namespace dhs
