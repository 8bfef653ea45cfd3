#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <functional>
#include <span>
#include <vector>

namespace dhs {

using NodeId = std::uint32_t;

struct OpenListEntry {
    std::int64_t h;
    std::uint64_t seq;
    NodeId node;

    /// Ordering key (h, seq): equal h values leave in insertion order.
    bool operator>(const OpenListEntry &o) const { return h != o.h ? h > o.h : seq > o.seq; }
};

/*
  Min-heap over (h, seq). Removal is lazy: entries of nodes expanded through
  another list stay in the heap and are skipped by the search when they reach
  the top.
*/
class OpenList {
public:
    void push(const OpenListEntry &e) {
        heap_.push_back(e);
        std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
    const OpenListEntry &top() const { return heap_.front(); }
    void pop() {
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
        heap_.pop_back();
    }
    bool empty() const { return heap_.empty(); }
    /// Includes stale entries.
    std::size_t size() const { return heap_.size(); }
    /// Heap order, stale entries included.
    std::span<const OpenListEntry> entries() const { return heap_; }

private:
    std::vector<OpenListEntry> heap_;
};

/*
  Exact statistics over the live (non-stale) h values of one open list.
  Values are integers, so count, sum and sum of squares are exact and an
  incrementally maintained instance always equals one rebuilt from scratch.
*/
class OpenListStats {
public:
    void add(std::int64_t h);
    /// Throws std::logic_error if h is not present.
    void remove(std::int64_t h);

    std::size_t count() const { return count_; }
    std::int64_t sum() const { return sum_; }
    std::int64_t sum_of_squares() const { return sum_sq_; }
    /// The statistics below are 0 for an empty list.
    std::int64_t max() const { return count_ ? values_.rbegin()->first : 0; }
    std::int64_t min() const { return count_ ? values_.begin()->first : 0; }
    double mean() const;
    /// Population variance, clamped at zero.
    double variance() const;

    friend bool operator==(const OpenListStats &, const OpenListStats &) = default;

private:
    std::map<std::int64_t, std::size_t> values_;
    std::size_t count_ = 0;
    std::int64_t sum_ = 0;
    std::int64_t sum_sq_ = 0;
};

}  // namespace dhs
