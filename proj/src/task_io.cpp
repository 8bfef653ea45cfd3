#include "dhs/task_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

using namespace std;

namespace dhs {
namespace {

struct Line {
    size_t number;
    vector<string> tokens;
};

vector<Line> tokenize(string_view text) {
    vector<Line> lines;
    size_t number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == string_view::npos)
            end = text.size();
        ++number;
        string_view raw = text.substr(pos, end - pos);
        istringstream in{string(raw)};
        Line line{number, {}};
        string tok;
        while (in >> tok)
            line.tokens.push_back(tok);
        if (!line.tokens.empty() && line.tokens[0][0] != '#')
            lines.push_back(move(line));
        pos = end + 1;
    }
    return lines;
}

class Cursor {
public:
    explicit Cursor(const Line &line) : line_(line) {}

    const string &next(const char *what) {
        if (i_ >= line_.tokens.size())
            throw SyntaxError(line_.number, string("expected ") + what);
        return line_.tokens[i_++];
    }

    long long integer(const char *what) {
        const string &tok = next(what);
        long long v = 0;
        auto [ptr, ec] = from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != errc() || ptr != tok.data() + tok.size())
            throw SyntaxError(line_.number, string("expected integer ") + what + ", got '" + tok + "'");
        return v;
    }

    void keyword(const char *kw) {
        const string &tok = next(kw);
        if (tok != kw)
            throw SyntaxError(line_.number, string("expected '") + kw + "', got '" + tok + "'");
    }

    void finish() const {
        if (i_ != line_.tokens.size())
            throw SyntaxError(line_.number, "trailing tokens starting at '" + line_.tokens[i_] + "'");
    }

    size_t number() const { return line_.number; }

private:
    const Line &line_;
    size_t i_ = 0;
};

const Line &expect_line(const vector<Line> &lines, size_t idx, const char *what) {
    if (idx >= lines.size()) {
        size_t last = lines.empty() ? 1 : lines.back().number;
        throw SyntaxError(last, string("unexpected end of input, expected ") + what);
    }
    return lines[idx];
}

PartialAssignment read_assignment(Cursor &c, const vector<int> &domains, const string &where) {
    long long m = c.integer("fact count");
    if (m < 0)
        throw SyntaxError(c.number(), "negative fact count");
    vector<Fact> facts;
    set<int> seen;
    for (long long i = 0; i < m; ++i) {
        long long var = c.integer("variable");
        long long val = c.integer("value");
        if (var < 0 || var >= static_cast<long long>(domains.size()))
            throw SemanticError("line " + to_string(c.number()) + ": " + where + " variable " +
                                to_string(var) + " out of range");
        if (val < 0 || val >= domains[var])
            throw SemanticError("line " + to_string(c.number()) + ": " + where + " value " +
                                to_string(val) + " out of range for variable " + to_string(var));
        if (!seen.insert(static_cast<int>(var)).second)
            throw SemanticError("line " + to_string(c.number()) + ": " + where +
                                " binds variable " + to_string(var) + " twice");
        facts.push_back({static_cast<int>(var), static_cast<int>(val)});
    }
    return PartialAssignment(move(facts));
}

void write_assignment(ostringstream &out, const PartialAssignment &pa) {
    out << pa.size();
    for (const Fact &f : pa.facts())
        out << ' ' << f.var << ' ' << f.value;
}

}  // namespace

SasTask parse_sas_task(string_view text) {
    vector<Line> lines = tokenize(text);
    size_t idx = 0;
    {
        Cursor c(expect_line(lines, idx++, "header"));
        c.keyword("sas");
        if (c.integer("format version") != 1)
            throw SyntaxError(c.number(), "unsupported sas format version");
        c.finish();
    }
    vector<int> domains;
    {
        Cursor c(expect_line(lines, idx++, "vars line"));
        c.keyword("vars");
        long long k = c.integer("variable count");
        if (k < 1)
            throw SemanticError("line " + to_string(c.number()) + ": task needs at least one variable");
        for (long long i = 0; i < k; ++i) {
            long long d = c.integer("domain size");
            if (d < 1)
                throw SemanticError("line " + to_string(c.number()) + ": empty domain for variable " +
                                    to_string(i));
            domains.push_back(static_cast<int>(d));
        }
        c.finish();
    }
    State init;
    {
        Cursor c(expect_line(lines, idx++, "init line"));
        c.keyword("init");
        for (size_t v = 0; v < domains.size(); ++v) {
            long long val = c.integer("initial value");
            if (val < 0 || val >= domains[v])
                throw SemanticError("line " + to_string(c.number()) + ": initial value " +
                                    to_string(val) + " out of range for variable " + to_string(v));
            init.values.push_back(static_cast<int>(val));
        }
        c.finish();
    }
    PartialAssignment goal;
    {
        Cursor c(expect_line(lines, idx++, "goal line"));
        c.keyword("goal");
        goal = read_assignment(c, domains, "goal");
        c.finish();
    }
    vector<Operator> ops;
    for (; idx < lines.size(); ++idx) {
        Cursor c(lines[idx]);
        c.keyword("op");
        Operator op;
        op.name = c.next("operator name");
        long long cost = c.integer("cost");
        if (cost < 0)
            throw SemanticError("line " + to_string(c.number()) + ": negative operator cost");
        op.cost = static_cast<int>(cost);
        c.keyword("pre");
        op.precondition = read_assignment(c, domains, "precondition");
        c.keyword("eff");
        op.effect = read_assignment(c, domains, "effect");
        if (op.effect.empty())
            throw SemanticError("line " + to_string(c.number()) + ": operator " + op.name +
                                " has an empty effect");
        c.finish();
        ops.push_back(move(op));
    }
    return SasTask(move(domains), move(init), move(ops), move(goal));
}

ExplicitTask parse_explicit_task(string_view text) {
    vector<Line> lines = tokenize(text);
    size_t idx = 0;
    {
        Cursor c(expect_line(lines, idx++, "header"));
        c.keyword("graph");
        if (c.integer("format version") != 1)
            throw SyntaxError(c.number(), "unsupported graph format version");
        c.finish();
    }
    long long n = 0;
    {
        Cursor c(expect_line(lines, idx++, "states line"));
        c.keyword("states");
        n = c.integer("state count");
        if (n < 1)
            throw SemanticError("line " + to_string(c.number()) + ": need at least one state");
        c.finish();
    }
    auto check = [n](long long id, const Cursor &c) {
        if (id < 0 || id >= n)
            throw SemanticError("line " + to_string(c.number()) + ": state " + to_string(id) +
                                " out of range");
        return static_cast<int>(id);
    };
    int init = 0;
    {
        Cursor c(expect_line(lines, idx++, "init line"));
        c.keyword("init");
        init = check(c.integer("initial state"), c);
        c.finish();
    }
    vector<int> goals;
    {
        Cursor c(expect_line(lines, idx++, "goals line"));
        c.keyword("goals");
        long long m = c.integer("goal count");
        for (long long i = 0; i < m; ++i)
            goals.push_back(check(c.integer("goal state"), c));
        c.finish();
    }
    ExplicitTask task(static_cast<int>(n), init, move(goals));
    for (; idx < lines.size(); ++idx) {
        Cursor c(lines[idx]);
        const string &kind = c.next("arc or h");
        if (kind == "arc") {
            int src = check(c.integer("source"), c);
            string label = c.next("label");
            long long cost = c.integer("cost");
            if (cost < 0)
                throw SemanticError("line " + to_string(c.number()) + ": negative arc cost");
            int dst = check(c.integer("target"), c);
            c.finish();
            task.add_arc(src, label, static_cast<int>(cost), dst);
        } else if (kind == "h") {
            long long hidx = c.integer("heuristic index");
            if (hidx < 0)
                throw SemanticError("line " + to_string(c.number()) + ": negative heuristic index");
            int state = check(c.integer("state"), c);
            const string &val = c.next("value");
            HeuristicValue hv;
            if (val == "inf") {
                hv = HeuristicValue::infinity();
            } else {
                long long v = 0;
                auto [ptr, ec] = from_chars(val.data(), val.data() + val.size(), v);
                if (ec != errc() || ptr != val.data() + val.size() || v < 0)
                    throw SyntaxError(c.number(), "expected non-negative integer or 'inf', got '" + val + "'");
                hv = HeuristicValue(v);
            }
            c.finish();
            task.set_heuristic(static_cast<size_t>(hidx), state, hv);
        } else {
            throw SyntaxError(c.number(), "expected 'arc' or 'h', got '" + kind + "'");
        }
    }
    return task;
}

unique_ptr<Task> parse_task(string_view text) {
    vector<Line> lines = tokenize(text);
    if (lines.empty())
        throw SyntaxError(1, "empty task file");
    const string &header = lines[0].tokens[0];
    if (header == "sas")
        return make_unique<SasTask>(parse_sas_task(text));
    if (header == "graph")
        return make_unique<ExplicitTask>(parse_explicit_task(text));
    throw SyntaxError(lines[0].number, "unknown task header '" + header + "'");
}

unique_ptr<Task> load_task_file(const string &path) {
    ifstream in(path);
    if (!in)
        throw runtime_error("cannot open task file " + path);
    ostringstream buf;
    buf << in.rdbuf();
    return parse_task(buf.str());
}

string serialize_task(const SasTask &task) {
    ostringstream out;
    out << "sas 1\n";
    out << "vars " << task.num_variables();
    for (int d : task.domain_sizes())
        out << ' ' << d;
    out << "\ninit";
    for (int v : task.initial_state().values)
        out << ' ' << v;
    out << "\ngoal ";
    write_assignment(out, task.goal());
    out << '\n';
    for (const Operator &op : task.operators()) {
        out << "op " << op.name << ' ' << op.cost << " pre ";
        write_assignment(out, op.precondition);
        out << " eff ";
        write_assignment(out, op.effect);
        out << '\n';
    }
    return out.str();
}

string serialize_task(const ExplicitTask &task) {
    ostringstream out;
    out << "graph 1\n";
    out << "states " << task.num_states() << '\n';
    out << "init " << task.initial_id() << '\n';
    out << "goals " << task.goal_states().size();
    for (int g : task.goal_states())
        out << ' ' << g;
    out << '\n';
    for (int s = 0; s < task.num_states(); ++s) {
        for (const auto &a : task.arcs(s))
            out << "arc " << s << ' ' << task.operator_name(a.op) << ' ' << a.cost << ' ' << a.target << '\n';
    }
    for (size_t h = 0; h < task.num_heuristics(); ++h) {
        for (int s = 0; s < task.num_states(); ++s)
            if (task.has_heuristic(h, s))
                out << "h " << h << ' ' << s << ' ' << task.heuristic(h, s) << '\n';
    }
    return out.str();
}

string serialize_plan(const Task &task, const Plan &plan) {
    ostringstream out;
    for (size_t op : plan.operators)
        out << task.operator_name(op) << '\n';
    return out.str();
}

}  // namespace dhs
