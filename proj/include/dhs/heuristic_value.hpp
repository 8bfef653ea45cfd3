#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>

namespace dhs {

/// Heuristic estimate in N0 u {inf}. Infinity is a dedicated sentinel, never a
/// large finite number; addition saturates at infinity.
class HeuristicValue {
public:
    constexpr HeuristicValue() = default;
    constexpr explicit HeuristicValue(std::int64_t v) : value_(v) {}

    static constexpr HeuristicValue infinity() {
        HeuristicValue h;
        h.value_ = kInf;
        return h;
    }

    constexpr bool is_infinite() const { return value_ == kInf; }
    constexpr bool is_finite() const { return value_ != kInf; }
    /// Only meaningful for finite values.
    constexpr std::int64_t value() const { return value_; }

    friend constexpr HeuristicValue operator+(HeuristicValue a, HeuristicValue b) {
        if (a.is_infinite() || b.is_infinite())
            return infinity();
        return HeuristicValue(a.value_ + b.value_);
    }
    HeuristicValue &operator+=(HeuristicValue o) { return *this = *this + o; }

    friend constexpr auto operator<=>(HeuristicValue, HeuristicValue) = default;

    std::string to_string() const { return is_infinite() ? "inf" : std::to_string(value_); }

private:
    static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
    std::int64_t value_ = 0;
};

inline std::ostream &operator<<(std::ostream &os, HeuristicValue h) { return os << h.to_string(); }

}  // namespace dhs
