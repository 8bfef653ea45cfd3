#include "dhs/features.hpp"

#include <string>

namespace dhs {

FeatureVector compute_features(std::span<const OpenListStats> stats, std::size_t t) {
    FeatureVector f(stats.size());
    auto v = f.values();
    for (std::size_t h = 0; h < stats.size(); ++h) {
        const OpenListStats &s = stats[h];
        double *out = &v[kStatsPerHeuristic * h];
        out[0] = static_cast<double>(s.max());
        out[1] = static_cast<double>(s.min());
        out[2] = s.mean();
        out[3] = s.variance();
        out[4] = static_cast<double>(s.count());
    }
    v.back() = static_cast<double>(t);
    return f;
}

FeatureDiff feature_diff(const FeatureVector &prev, const FeatureVector &cur) {
    auto p = prev.values();
    auto c = cur.values();
    if (p.size() != c.size())
        throw DimensionMismatch("feature vectors of length " + std::to_string(p.size()) + " and " +
                                std::to_string(c.size()));
    FeatureDiff d;
    d.values.resize(c.size());
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        d.values[i] = c[i] - p[i];
    d.values.back() = c.back();
    return d;
}

FeatureDiff initial_diff(const FeatureVector &cur) {
    FeatureDiff d;
    d.values.assign(cur.values().size(), 0.0);
    d.values.back() = cur.t();
    return d;
}

double step_reward(StepKind) {
    return -1.0;
}

}  // namespace dhs
