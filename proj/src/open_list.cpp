#include "dhs/open_list.hpp"

#include <algorithm>
#include <stdexcept>

namespace dhs {

void OpenListStats::add(std::int64_t h) {
    ++values_[h];
    ++count_;
    sum_ += h;
    sum_sq_ += h * h;
}

void OpenListStats::remove(std::int64_t h) {
    auto it = values_.find(h);
    if (it == values_.end())
        throw std::logic_error("open list stats: removing absent value");
    if (--it->second == 0)
        values_.erase(it);
    --count_;
    sum_ -= h;
    sum_sq_ -= h * h;
}

double OpenListStats::mean() const {
    if (count_ == 0)
        return 0.0;
    return static_cast<double>(sum_) / static_cast<double>(count_);
}

double OpenListStats::variance() const {
    if (count_ == 0)
        return 0.0;
    double n = static_cast<double>(count_);
    double m = static_cast<double>(sum_) / n;
    return std::max(0.0, static_cast<double>(sum_sq_) / n - m * m);
}

}  // namespace dhs
