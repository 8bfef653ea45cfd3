#include "dhs/experiment.hpp"

#include "dhs/heuristics.hpp"
#include "dhs/policy.hpp"
#include "dhs/search.hpp"
#include "dhs/task_io.hpp"
#include "dhs/taskgen.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

using namespace std;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace dhs {
namespace {

vector<string> split(const string &s, char sep) {
    vector<string> parts;
    size_t start = 0;
    while (true) {
        size_t end = s.find(sep, start);
        parts.push_back(s.substr(start, end - start));
        if (end == string::npos)
            return parts;
        start = end + 1;
    }
}

long long to_int(const string &uri, const string &text) {
    try {
        size_t used = 0;
        long long v = stoll(text, &used);
        if (used == text.size())
            return v;
    } catch (const exception &) {
    }
    throw ConfigError("bad number '" + text + "' in instance '" + uri + "'");
}

bool is_generator_uri(const string &uri) {
    string kind = uri.substr(0, uri.find(':'));
    return uri.find(':') != string::npos &&
           (kind == "pi" || kind == "pi-prime" || kind == "artificial" || kind == "transport");
}

}  // namespace

unique_ptr<Task> load_instance(const string &uri) {
    if (!is_generator_uri(uri)) {
        if (!fs::exists(uri))
            throw ConfigError("missing task file '" + uri + "'");
        return load_task_file(uri);
    }
    vector<string> parts = split(uri, ':');
    const string &kind = parts[0];
    try {
        if ((kind == "pi" || kind == "pi-prime") && parts.size() == 2) {
            int n = static_cast<int>(to_int(uri, parts[1]));
            if (kind == "pi")
                return make_unique<ExplicitTask>(gen_pi_n(n));
            return make_unique<ExplicitTask>(gen_pi_prime_n(n));
        }
        if (kind == "artificial" && parts.size() == 4) {
            auto inst = gen_artificial(static_cast<int>(to_int(uri, parts[1])), static_cast<int>(to_int(uri, parts[2])),
                                       static_cast<uint64_t>(to_int(uri, parts[3])));
            return make_unique<ExplicitTask>(move(inst.task));
        }
        if (kind == "transport" && parts.size() == 4) {
            auto inst = gen_transport(static_cast<int>(to_int(uri, parts[1])), static_cast<int>(to_int(uri, parts[2])),
                                      static_cast<uint64_t>(to_int(uri, parts[3])));
            return make_unique<SasTask>(move(inst.task));
        }
    } catch (const invalid_argument &e) {
        throw ConfigError("instance '" + uri + "': " + e.what());
    }
    throw ConfigError("malformed instance '" + uri + "'");
}

string instance_domain(const string &uri) {
    if (is_generator_uri(uri))
        return uri.substr(0, uri.find(':'));
    fs::path parent = fs::path(uri).parent_path();
    return parent.empty() ? string("tasks") : parent.filename().string();
}

namespace {

string trim(const string &s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Removes a '#' comment that is not inside a quoted string.
string strip_comment(const string &line) {
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

struct ConfigValue {
    vector<string> items;
    bool is_list = false;
};

ConfigValue parse_value(const string &raw, size_t line_no) {
    auto error = [&](const string &what) {
        return ConfigError("config line " + to_string(line_no) + ": " + what);
    };
    auto scalar = [&](const string &text) {
        string t = trim(text);
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
            return t.substr(1, t.size() - 2);
        if (t.empty() || t.find('"') != string::npos)
            throw error("malformed value '" + text + "'");
        return t;
    };
    ConfigValue v;
    string text = trim(raw);
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']')
            throw error("unterminated list");
        v.is_list = true;
        string inner = trim(text.substr(1, text.size() - 2));
        if (inner.empty())
            return v;
        string current;
        bool quoted = false;
        for (char c : inner) {
            if (c == '"')
                quoted = !quoted;
            if (c == ',' && !quoted) {
                v.items.push_back(scalar(current));
                current.clear();
            } else {
                current += c;
            }
        }
        if (!trim(current).empty())
            v.items.push_back(scalar(current));
        return v;
    }
    v.items.push_back(scalar(text));
    return v;
}

double parse_double(const string &key, const string &text) {
    try {
        size_t used = 0;
        double d = stod(text, &used);
        if (used == text.size())
            return d;
    } catch (const exception &) {
    }
    throw ConfigError("key '" + key + "' expects a number, got '" + text + "'");
}

long long parse_integer(const string &key, const string &text) {
    try {
        size_t used = 0;
        long long v = stoll(text, &used);
        if (used == text.size())
            return v;
    } catch (const exception &) {
    }
    throw ConfigError("key '" + key + "' expects an integer, got '" + text + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const string &text) {
    ExperimentConfig config;
    istringstream in(text);
    string line;
    size_t line_no = 0;
    set<string> seen;
    while (getline(in, line)) {
        ++line_no;
        string content = trim(strip_comment(line));
        if (content.empty())
            continue;
        size_t eq = content.find('=');
        if (eq == string::npos)
            throw ConfigError("config line " + to_string(line_no) + ": expected key = value");
        string key = trim(content.substr(0, eq));
        ConfigValue value = parse_value(content.substr(eq + 1), line_no);
        if (!seen.insert(key).second)
            throw ConfigError("config key '" + key + "' given twice");
        auto single = [&]() -> const string & {
            if (value.is_list || value.items.size() != 1)
                throw ConfigError("key '" + key + "' expects a single value");
            return value.items.front();
        };
        if (key == "instances") {
            config.instances = value.items;
        } else if (key == "policies") {
            config.policies = value.items;
        } else if (key == "seeds") {
            config.seeds.clear();
            for (const string &s : value.items) {
                long long v = parse_integer(key, s);
                if (v < 0)
                    throw ConfigError("seeds must be non-negative");
                config.seeds.push_back(static_cast<uint64_t>(v));
            }
        } else if (key == "max_expansions") {
            long long v = parse_integer(key, single());
            if (v <= 0)
                throw ConfigError("budget must be positive: max_expansions = " + to_string(v));
            config.max_expansions = static_cast<size_t>(v);
        } else if (key == "max_seconds") {
            double v = parse_double(key, single());
            if (!(v > 0))
                throw ConfigError("budget must be positive: max_seconds = " + single());
            config.max_seconds = v;
        } else if (key == "workers") {
            long long v = parse_integer(key, single());
            if (v < 1)
                throw ConfigError("workers must be at least 1");
            config.workers = static_cast<int>(v);
        } else if (key == "out_dir") {
            config.out_dir = single();
        } else if (key == "portfolio") {
            config.portfolio = single();
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (config.seeds.empty())
        throw ConfigError("need at least one seed");
    return config;
}

ExperimentConfig load_experiment_config(const string &path) {
    ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig config = parse_experiment_config(ss.str());
    // Relative task files and output directories are taken relative to the config.
    fs::path base = fs::path(path).parent_path();
    for (string &uri : config.instances) {
        if (!is_generator_uri(uri) && fs::path(uri).is_relative() && !base.empty())
            uri = (base / uri).lexically_normal().string();
    }
    if (fs::path(config.out_dir).is_relative() && !base.empty())
        config.out_dir = (base / config.out_dir).lexically_normal().string();
    return config;
}

string record_to_json(const RunRecord &r) {
    json j;
    j["instance"] = r.instance;
    j["domain"] = r.domain;
    j["policy"] = r.policy;
    j["seed"] = r.seed;
    j["outcome"] = r.outcome;
    j["expansions"] = r.expansions;
    j["generated"] = r.generated;
    j["cost"] = r.cost ? json(*r.cost) : json(nullptr);
    j["wall_time_ms"] = r.wall_time_ms;
    j["usage_quarters"] = r.usage;
    j["switching"] = {{"immediate", r.switching.immediate},
                      {"high", r.switching.high},
                      {"medium", r.switching.medium},
                      {"low", r.switching.low}};
    return j.dump();
}

RunRecord record_from_json(const string &text) {
    json j = json::parse(text);
    RunRecord r;
    r.instance = j.at("instance").get<string>();
    r.domain = j.at("domain").get<string>();
    r.policy = j.at("policy").get<string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.outcome = j.at("outcome").get<string>();
    r.expansions = j.at("expansions").get<size_t>();
    r.generated = j.at("generated").get<size_t>();
    if (!j.at("cost").is_null())
        r.cost = j["cost"].get<int64_t>();
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    r.usage = j.at("usage_quarters").get<vector<vector<double>>>();
    const json &s = j.at("switching");
    r.switching = {s.at("immediate").get<double>(), s.at("high").get<double>(), s.at("medium").get<double>(),
                   s.at("low").get<double>()};
    return r;
}

vector<Job> expand_jobs(const ExperimentConfig &config) {
    vector<Job> jobs;
    for (const string &instance : config.instances) {
        size_t n = 0;
        bool need_n = any_of(config.policies.begin(), config.policies.end(),
                             [](const string &p) { return p == "alt:all"; });
        if (need_n) {
            unique_ptr<Task> task = load_instance(instance);
            n = parse_portfolio_spec(*task, config.portfolio).size();
        }
        for (const string &policy : config.policies) {
            for (uint64_t seed : config.seeds) {
                if (policy == "alt:all") {
                    for (const auto &perm : all_permutations(n))
                        jobs.push_back({instance, AlternationPolicy(perm).spec(), seed});
                } else if (policy == "rnd") {
                    jobs.push_back({instance, "rnd:" + to_string(seed), seed});
                } else {
                    jobs.push_back({instance, policy, seed});
                }
            }
        }
    }
    return jobs;
}

RunRecord run_job(const Job &job, const ExperimentConfig &config) {
    unique_ptr<Task> task = load_instance(job.instance);
    Portfolio portfolio = make_portfolio(*task, parse_portfolio_spec(*task, config.portfolio));
    unique_ptr<ControlPolicy> policy = make_policy(job.policy);
    SearchBudget budget;
    budget.max_expansions = config.max_expansions;
    budget.max_seconds = config.max_seconds;
    SearchResult result = run_gbfs(*task, portfolio, *policy, budget, TraceMode::ChoicesOnly);

    RunRecord r;
    r.instance = job.instance;
    r.domain = instance_domain(job.instance);
    r.policy = job.policy;
    r.seed = job.seed;
    r.outcome = outcome_name(result.outcome);
    r.expansions = result.expansions;
    r.generated = result.generated;
    if (result.solved())
        r.cost = result.cost;
    r.wall_time_ms = result.wall_time_ms;
    vector<size_t> choices;
    for (const TraceStep &s : result.trace)
        choices.push_back(s.chosen);
    if (choices.size() >= 4)
        r.usage = usage_quarters(choices, portfolio.size());
    r.switching = switch_frequency(choices);
    return r;
}

namespace {

string run_file_name(const Job &job) {
    string key = job.instance + "|" + job.policy + "|" + to_string(job.seed);
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    string readable = fs::path(job.instance).filename().string() + "__" + job.policy + "__" + to_string(job.seed);
    for (char &c : readable) {
        if (!isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.' && c != '_')
            c = '_';
    }
    char hex[17];
    snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return readable + "__" + hex + ".json";
}

void write_file(const fs::path &path, const string &content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        ofstream out(tmp);
        if (!out)
            throw runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

bool valid_record_file(const fs::path &path) {
    ifstream in(path);
    if (!in)
        return false;
    stringstream ss;
    ss << in.rdbuf();
    try {
        record_from_json(ss.str());
        return true;
    } catch (const exception &) {
        return false;
    }
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig &config, bool parallel) {
    if (config.max_expansions == 0 || !(config.max_seconds > 0))
        throw ConfigError("budgets must be positive");
    for (const string &instance : config.instances)
        load_instance(instance);
    for (const string &policy : config.policies) {
        if (policy != "alt:all" && policy != "rnd")
            make_policy(policy);
    }

    vector<Job> jobs = expand_jobs(config);
    fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir / "runs");

    ExperimentSummary summary;
    summary.jobs = jobs.size();
    vector<Job> pending;
    for (const Job &job : jobs) {
        if (valid_record_file(out_dir / "runs" / run_file_name(job)))
            ++summary.reused;
        else
            pending.push_back(job);
    }

    vector<string> errors(pending.size());
    const long long count = static_cast<long long>(pending.size());
    int threads = parallel ? max(1, config.workers) : 1;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            RunRecord r = run_job(pending[i], config);
            write_file(out_dir / "runs" / run_file_name(pending[i]), record_to_json(r) + "\n");
        } catch (const exception &e) {
            errors[i] = pending[i].instance + " / " + pending[i].policy + ": " + e.what();
        }
    }
    for (const string &e : errors) {
        if (!e.empty())
            throw runtime_error(e);
    }
    summary.executed = pending.size();

    vector<RunRecord> records = load_records(out_dir);
    write_file(out_dir / "runs.csv", report_csv(records));
    write_file(out_dir / "summary.json", report_json(records));
    write_file(out_dir / "summary.txt", report_table(records));
    return summary;
}

vector<RunRecord> load_records(const fs::path &dir) {
    vector<RunRecord> records;
    fs::path runs = dir / "runs";
    if (!fs::exists(runs))
        throw runtime_error("no run files under " + dir.string());
    for (const auto &entry : fs::directory_iterator(runs)) {
        if (entry.path().extension() != ".json")
            continue;
        ifstream in(entry.path());
        stringstream ss;
        ss << in.rdbuf();
        try {
            records.push_back(record_from_json(ss.str()));
        } catch (const exception &e) {
            throw runtime_error("corrupt run file " + entry.path().string() + ": " + e.what());
        }
    }
    sort(records.begin(), records.end(), [](const RunRecord &a, const RunRecord &b) {
        return tie(a.instance, a.policy, a.seed) < tie(b.instance, b.policy, b.seed);
    });
    return records;
}

namespace {

struct Scores {
    double coverage = 0, guidance = 0, speed = 0, quality = 0;
};

Scores score_record(const RunRecord &r, const map<string, double> &best_cost) {
    Scores s;
    bool solved = r.solved();
    s.coverage = solved ? 1.0 : 0.0;
    s.guidance = guidance_score(r.expansions, solved);
    s.speed = speed_score(r.wall_time_ms / 1000.0, solved);
    optional<double> cost;
    if (solved && r.cost)
        cost = static_cast<double>(*r.cost);
    auto it = best_cost.find(r.instance);
    s.quality = quality_score(cost, it == best_cost.end() ? 0.0 : it->second);
    return s;
}

map<string, double> best_costs(const vector<RunRecord> &records) {
    map<string, double> best;
    for (const RunRecord &r : records) {
        if (!r.solved() || !r.cost)
            continue;
        double c = static_cast<double>(*r.cost);
        auto [it, inserted] = best.emplace(r.instance, c);
        if (!inserted)
            it->second = min(it->second, c);
    }
    return best;
}

/// Per-instance scores (averaged over seeds) of one strategy.
using InstanceScores = map<string, Scores>;

struct Aggregate {
    string name;
    map<string, InstanceScores> by_domain;
    size_t members = 1;
    size_t runs = 0;
};

struct DomainRow {
    size_t instances = 0;
    double coverage_sum = 0;
    Scores mean;
};

map<string, DomainRow> domain_rows(const Aggregate &a) {
    map<string, DomainRow> rows;
    for (const auto &[domain, inst] : a.by_domain) {
        DomainRow row;
        row.instances = inst.size();
        for (const auto &[name, s] : inst) {
            row.coverage_sum += s.coverage;
            row.mean.coverage += s.coverage;
            row.mean.guidance += s.guidance;
            row.mean.speed += s.speed;
            row.mean.quality += s.quality;
        }
        double k = static_cast<double>(row.instances);
        row.mean = {row.mean.coverage / k, row.mean.guidance / k, row.mean.speed / k, row.mean.quality / k};
        rows[domain] = row;
    }
    return rows;
}

/// Total score in percent: mean over domains of the per-domain means.
Scores total_percent(const map<string, DomainRow> &rows) {
    Scores t;
    for (const auto &[d, row] : rows) {
        t.coverage += row.mean.coverage;
        t.guidance += row.mean.guidance;
        t.speed += row.mean.speed;
        t.quality += row.mean.quality;
    }
    double k = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    return {100 * t.coverage / k, 100 * t.guidance / k, 100 * t.speed / k, 100 * t.quality / k};
}

vector<Aggregate> policy_aggregates(const vector<RunRecord> &records) {
    map<string, double> best = best_costs(records);
    map<string, map<string, map<string, pair<Scores, size_t>>>> acc;
    map<string, size_t> runs;
    for (const RunRecord &r : records) {
        Scores s = score_record(r, best);
        auto &[sum, n] = acc[r.policy][r.domain][r.instance];
        sum.coverage += s.coverage;
        sum.guidance += s.guidance;
        sum.speed += s.speed;
        sum.quality += s.quality;
        ++n;
        ++runs[r.policy];
    }
    vector<Aggregate> out;
    for (const auto &[policy, domains] : acc) {
        Aggregate a;
        a.name = policy;
        a.runs = runs[policy];
        for (const auto &[domain, insts] : domains) {
            for (const auto &[inst, sn] : insts) {
                double k = static_cast<double>(sn.second);
                a.by_domain[domain][inst] = {sn.first.coverage / k, sn.first.guidance / k, sn.first.speed / k,
                                             sn.first.quality / k};
            }
        }
        out.push_back(move(a));
    }
    return out;
}

string family_of(const string &policy) {
    size_t colon = policy.find(':');
    return colon == string::npos ? policy : policy.substr(0, colon);
}

/// Average and oracle rows for every family with at least two members that
/// share the same instances.
vector<Aggregate> family_aggregates(const vector<Aggregate> &policies) {
    map<string, vector<const Aggregate *>> families;
    for (const Aggregate &a : policies)
        families[family_of(a.name)].push_back(&a);
    vector<Aggregate> out;
    for (const auto &[family, members] : families) {
        if (members.size() < 2)
            continue;
        bool same = all_of(members.begin(), members.end(), [&](const Aggregate *m) {
            if (m->by_domain.size() != members[0]->by_domain.size())
                return false;
            for (const auto &[d, insts] : m->by_domain) {
                auto it = members[0]->by_domain.find(d);
                if (it == members[0]->by_domain.end() || it->second.size() != insts.size())
                    return false;
                for (const auto &[i, s] : insts) {
                    if (!it->second.count(i))
                        return false;
                }
            }
            return true;
        });
        if (!same)
            continue;
        Aggregate avg, oracle;
        avg.name = family + " (avg)";
        oracle.name = family + " (oracle)";
        avg.members = oracle.members = members.size();
        for (const Aggregate *m : members) {
            avg.runs += m->runs;
            oracle.runs += m->runs;
        }
        for (const auto &[domain, insts] : members[0]->by_domain) {
            for (const auto &[inst, first] : insts) {
                vector<vector<double>> cov, gui, spd, qua;
                Scores mean;
                for (const Aggregate *m : members) {
                    const Scores &s = m->by_domain.at(domain).at(inst);
                    cov.push_back({s.coverage});
                    gui.push_back({s.guidance});
                    spd.push_back({s.speed});
                    qua.push_back({s.quality});
                    mean.coverage += s.coverage;
                    mean.guidance += s.guidance;
                    mean.speed += s.speed;
                    mean.quality += s.quality;
                }
                double k = static_cast<double>(members.size());
                avg.by_domain[domain][inst] = {mean.coverage / k, mean.guidance / k, mean.speed / k,
                                               mean.quality / k};
                oracle.by_domain[domain][inst] = {best_as(cov)[0], best_as(gui)[0], best_as(spd)[0],
                                                  best_as(qua)[0]};
            }
        }
        out.push_back(move(avg));
        out.push_back(move(oracle));
    }
    return out;
}

json aggregate_json(const Aggregate &a) {
    json j;
    j["name"] = a.name;
    j["members"] = a.members;
    j["runs"] = a.runs;
    auto rows = domain_rows(a);
    json domains = json::object();
    for (const auto &[d, row] : rows) {
        domains[d] = {{"instances", row.instances},   {"coverage_sum", row.coverage_sum},
                      {"coverage", row.mean.coverage}, {"guidance", row.mean.guidance},
                      {"speed", row.mean.speed},       {"quality", row.mean.quality}};
    }
    j["domains"] = domains;
    Scores t = total_percent(rows);
    j["total_percent"] = {
        {"coverage", t.coverage}, {"guidance", t.guidance}, {"speed", t.speed}, {"quality", t.quality}};
    return j;
}

string fmt(const char *format, double v) {
    char buf[64];
    snprintf(buf, sizeof(buf), format, v);
    return buf;
}

}  // namespace

string report_csv(const vector<RunRecord> &records) {
    map<string, double> best = best_costs(records);
    string out = "instance,domain,policy,seed,outcome,expansions,generated,cost,wall_time_ms,coverage,guidance,"
                 "speed,quality\n";
    for (const RunRecord &r : records) {
        Scores s = score_record(r, best);
        out += r.instance + "," + r.domain + "," + r.policy + "," + to_string(r.seed) + "," + r.outcome + "," +
               to_string(r.expansions) + "," + to_string(r.generated) + "," +
               (r.cost ? to_string(*r.cost) : string()) + "," + fmt("%.3f", r.wall_time_ms) + "," +
               fmt("%.0f", s.coverage) + "," + fmt("%.6f", s.guidance) + "," + fmt("%.6f", s.speed) + "," +
               fmt("%.6f", s.quality) + "\n";
    }
    return out;
}

string report_json(const vector<RunRecord> &records) {
    vector<Aggregate> policies = policy_aggregates(records);
    json j;
    j["runs"] = records.size();
    j["note"] = "speed scores depend on wall-clock time and are machine-specific";
    json p = json::array();
    for (const Aggregate &a : policies)
        p.push_back(aggregate_json(a));
    j["policies"] = p;
    json f = json::array();
    for (const Aggregate &a : family_aggregates(policies))
        f.push_back(aggregate_json(a));
    j["families"] = f;
    return j.dump(2) + "\n";
}

string report_table(const vector<RunRecord> &records) {
    vector<Aggregate> rows = policy_aggregates(records);
    vector<Aggregate> families = family_aggregates(rows);
    rows.insert(rows.end(), families.begin(), families.end());
    size_t width = 8;
    for (const Aggregate &a : rows)
        width = max(width, a.name.size());
    auto pad = [&](string s) {
        s.resize(width, ' ');
        return s;
    };
    string out = pad("policy") + "  runs  coverage  guidance     speed   quality\n";
    for (const Aggregate &a : rows) {
        Scores t = total_percent(domain_rows(a));
        char buf[128];
        snprintf(buf, sizeof(buf), "  %4zu  %8.2f  %8.2f  %8.2f  %8.2f\n", a.runs, t.coverage, t.guidance, t.speed,
                 t.quality);
        out += pad(a.name) + buf;
    }
    out += "(percent; mean over domains; speed is machine-specific)\n";
    return out;
}

}  // namespace dhs
