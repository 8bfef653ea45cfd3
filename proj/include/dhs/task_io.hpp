#pragma once

#include "dhs/task.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dhs {

/// Malformed input; line is 1-based.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input describing an inconsistent task.
class SemanticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
  Line-based text formats.

    sas 1
    vars k d0 ... d{k-1}
    init v0 ... v{k-1}
    goal m (var val){m}
    op <name> <cost> pre p (var val){p} eff q (var val){q}

    graph 1
    states N
    init i
    goals m i0 ...
    arc <src> <label> <cost> <dst>
    h <heuristic-index> <state> <value|inf>

  Blank lines and lines starting with '#' are ignored.
*/
SasTask parse_sas_task(std::string_view text);
ExplicitTask parse_explicit_task(std::string_view text);
/// Dispatches on the header line.
std::unique_ptr<Task> parse_task(std::string_view text);
std::unique_ptr<Task> load_task_file(const std::string &path);

std::string serialize_task(const SasTask &task);
std::string serialize_task(const ExplicitTask &task);
std::string serialize_plan(const Task &task, const Plan &plan);

}  // namespace dhs
