#pragma once

#include "dhs/open_list.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dhs {

inline constexpr std::size_t kStatsPerHeuristic = 5;

inline constexpr std::size_t feature_length(std::size_t num_heuristics) {
    return kStatsPerHeuristic * num_heuristics + 1;
}

/*
  Planner-state description: for each open list (max, min, mean, variance,
  count) of its live h values, followed by the step counter t. Length 5n+1.
  Empty lists contribute five zeros.
*/
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::size_t num_heuristics)
        : values_(feature_length(num_heuristics), 0.0) {}

    std::size_t num_heuristics() const { return (values_.size() - 1) / kStatsPerHeuristic; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double max(std::size_t h) const { return values_[kStatsPerHeuristic * h + 0]; }
    double min(std::size_t h) const { return values_[kStatsPerHeuristic * h + 1]; }
    double mean(std::size_t h) const { return values_[kStatsPerHeuristic * h + 2]; }
    double variance(std::size_t h) const { return values_[kStatsPerHeuristic * h + 3]; }
    double count(std::size_t h) const { return values_[kStatsPerHeuristic * h + 4]; }
    double t() const { return values_.back(); }

    friend bool operator==(const FeatureVector &, const FeatureVector &) = default;

private:
    std::vector<double> values_;
};

/// Elementwise difference of successive feature vectors; the last component
/// is the raw step counter of the newer vector.
struct FeatureDiff {
    std::vector<double> values;

    friend bool operator==(const FeatureDiff &, const FeatureDiff &) = default;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

FeatureVector compute_features(std::span<const OpenListStats> stats, std::size_t t);
FeatureDiff feature_diff(const FeatureVector &prev, const FeatureVector &cur);
/// Diff for the first step: zero statistics, raw t.
FeatureDiff initial_diff(const FeatureVector &cur);

enum class StepKind { Expansion, Terminal };
/// -1 for every step, terminal included.
double step_reward(StepKind kind);

}  // namespace dhs
