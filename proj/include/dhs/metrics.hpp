#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dhs {

/// 1 for at most one expansion, 0 beyond 10^6 or when unsolved, log10
/// interpolation in between: 1 - log10(e)/6.
double guidance_score(std::size_t expansions, bool solved);
/// 1 up to one second, 0 from 300 s on or when unsolved: 1 - ln(s)/ln(300).
double speed_score(double seconds, bool solved);
/// best_cost / cost; 1 when both are 0; 0 when unsolved.
double quality_score(std::optional<double> cost, double best_cost);
/// Fraction of solved runs; throws std::invalid_argument on an empty set.
double coverage(std::span<const bool> solved);

/// Per-instance maximum over the member strategies' scores
/// (scores[member][instance]).
std::vector<double> best_as(const std::vector<std::vector<double>> &scores);

class TraceTooShort : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Selection frequencies of each heuristic in the four quarters of the trace.
/// Quarters differ by at most one step, the longer ones first.
std::vector<std::vector<double>> usage_quarters(std::span<const std::size_t> choices, std::size_t num_heuristics);

/// Lengths of the maximal runs of identical choices.
std::vector<std::size_t> run_lengths(std::span<const std::size_t> choices);

struct SwitchHistogram {
    double immediate = 0.0; // run length 1
    double high = 0.0;      // 2..100
    double medium = 0.0;    // 101..1000
    double low = 0.0;       // > 1000
};

/// Fraction of steps that belong to runs of each length class.
SwitchHistogram switch_frequency(std::span<const std::size_t> choices);

}  // namespace dhs
