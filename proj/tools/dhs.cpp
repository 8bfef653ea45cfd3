#include "dhs/bridge.hpp"
#include "dhs/dqn.hpp"
#include "dhs/experiment.hpp"
#include "dhs/heuristics.hpp"
#include "dhs/metrics.hpp"
#include "dhs/search.hpp"
#include "dhs/task_io.hpp"
#include "dhs/taskgen.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace std;
using namespace dhs;

namespace {

void write_output(const string &path, const string &content) {
    if (path.empty() || path == "-") {
        cout << content;
        return;
    }
    ofstream out(path);
    if (!out)
        throw runtime_error("cannot write " + path);
    out << content;
}

string read_file(const string &path) {
    ifstream in(path);
    if (!in)
        throw runtime_error("cannot read " + path);
    stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SearchBudget make_budget(size_t max_expansions, double max_seconds) {
    SearchBudget b;
    if (max_expansions > 0)
        b.max_expansions = max_expansions;
    if (max_seconds > 0)
        b.max_seconds = max_seconds;
    return b;
}

size_t trace_num_heuristics(const string &csv) {
    string header = csv.substr(0, csv.find('\n'));
    size_t columns = static_cast<size_t>(count(header.begin(), header.end(), ',')) + 1;
    if (columns < 3 || (columns - 3) % kStatsPerHeuristic != 0)
        throw runtime_error("trace header has an unexpected number of columns");
    return (columns - 3) / kStatsPerHeuristic;
}

void print_result(const Task &task, const SearchResult &r, const string &trace_path, const string &plan_path) {
    cout << result_summary_json(r) << '\n';
    if (!trace_path.empty())
        write_output(trace_path, trace_csv(r));
    if (!plan_path.empty() && r.plan)
        write_output(plan_path, serialize_plan(task, *r.plan));
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Heuristic selection in greedy best-first search: search, control, training and evaluation"};
    app.require_subcommand(1);

    // gen
    auto *gen = app.add_subcommand("gen", "Generate benchmark tasks");
    gen->require_subcommand(1);
    string gen_out;
    int pi_n = 6;
    bool pi_prime = false, pi_swapped = false;
    auto *gen_pi = gen->add_subcommand("pi", "Trap family for heuristic switching");
    gen_pi->add_option("--n", pi_n, "Family index (>= 4)");
    gen_pi->add_flag("--prime", pi_prime, "Variant with an extra state before the goal");
    gen_pi->add_flag("--swapped", pi_swapped, "Exchange the two heuristic tables");
    gen_pi->add_option("-o,--output", gen_out, "Output file (default stdout)");

    int depth = 50, branching = 3;
    uint64_t gen_seed = 0;
    string witness_out;
    auto *gen_art = gen->add_subcommand("artificial", "Layered two-heuristic domain");
    gen_art->add_option("--depth", depth);
    gen_art->add_option("--branching", branching);
    gen_art->add_option("--seed", gen_seed);
    gen_art->add_option("-o,--output", gen_out);
    gen_art->add_option("--witness", witness_out, "Write the optimal heuristic sequence here");

    int locations = 6, packages = 3;
    auto *gen_tr = gen->add_subcommand("transport", "Random transport task (SAS+)");
    gen_tr->add_option("--locations", locations);
    gen_tr->add_option("--packages", packages);
    gen_tr->add_option("--seed", gen_seed);
    gen_tr->add_option("-o,--output", gen_out);
    gen_tr->add_option("--witness", witness_out, "Write a valid plan here");

    // search
    auto *search = app.add_subcommand("search", "Run greedy best-first search once");
    string task_arg, portfolio_arg = "default", policy_arg, trace_out, plan_out;
    size_t max_expansions = 0;
    double max_seconds = 0;
    search->add_option("--task", task_arg, "Task file or generator URI")->required();
    search->add_option("--portfolio", portfolio_arg, "Comma-separated heuristics or 'default'");
    search->add_option("--policy", policy_arg, "Control policy spec")->required();
    search->add_option("--max-expansions", max_expansions);
    search->add_option("--max-seconds", max_seconds);
    search->add_option("--trace", trace_out, "Write the per-step trace CSV here");
    search->add_option("--plan", plan_out, "Write the plan here");

    // run / report / analyze
    auto *run = app.add_subcommand("run", "Run an experiment from a config file");
    string config_path;
    bool serial = false;
    run->add_option("--config", config_path)->required();
    run->add_flag("--serial", serial, "Ignore the worker count and run jobs one by one");

    auto *report = app.add_subcommand("report", "Summarize the run files of an experiment");
    string report_in, report_format = "table";
    report->add_option("--in", report_in, "Experiment output directory")->required();
    report->add_option("--format", report_format)->check(CLI::IsMember({"csv", "json", "table"}));

    auto *analyze = app.add_subcommand("analyze", "Heuristic usage and switching statistics of a trace");
    string analysis, trace_in;
    analyze->add_option("kind", analysis)->required()->check(CLI::IsMember({"usage", "switching"}));
    analyze->add_option("--trace", trace_in)->required();

    // bridge
    auto *serve = app.add_subcommand("serve", "Run a search controlled by a remote controller");
    string listen_arg = "127.0.0.1:5555";
    double timeout = kDefaultBridgeTimeout;
    serve->add_option("--task", task_arg)->required();
    serve->add_option("--portfolio", portfolio_arg);
    serve->add_option("--listen", listen_arg);
    serve->add_option("--timeout", timeout, "Seconds to wait for the controller");
    serve->add_option("--max-expansions", max_expansions);
    serve->add_option("--max-seconds", max_seconds);
    serve->add_option("--trace", trace_out);
    serve->add_option("--plan", plan_out);

    auto *control = app.add_subcommand("control", "Act as a remote controller");
    string connect_arg, control_listen;
    size_t sessions = 1;
    auto *connect_opt = control->add_option("--connect", connect_arg, "Connect to a serving search");
    control->add_option("--listen", control_listen, "Wait for searches using remote:<host:port>")
        ->excludes(connect_opt);
    control->add_option("--policy", policy_arg)->required();
    control->add_option("--sessions", sessions, "Searches to answer when listening (0 = forever)");
    control->add_option("--timeout", timeout);

    // train
    auto *trainer = app.add_subcommand("train", "Train a Q-network policy");
    vector<string> train_instances;
    string model_out = "model.json", curve_out;
    TrainConfig tc;
    string activation = "relu";
    trainer->add_option("--instance", train_instances, "Training instance (repeatable)")->required();
    trainer->add_option("--portfolio", portfolio_arg);
    trainer->add_option("--updates", tc.total_updates);
    trainer->add_option("--epsilon-decay", tc.epsilon_decay_steps);
    trainer->add_option("--eval-interval", tc.eval_interval);
    trainer->add_option("--cutoff", tc.episode_cutoff, "Expansions per episode");
    trainer->add_option("--gamma", tc.gamma);
    trainer->add_option("--lr", tc.adam.learning_rate);
    trainer->add_option("--batch", tc.batch_size);
    trainer->add_option("--hidden", tc.hidden, "Hidden layer sizes");
    trainer->add_option("--activation", activation)->check(CLI::IsMember({"relu", "tanh"}));
    trainer->add_flag("--normalize", tc.normalize, "Running z-normalization of the inputs");
    trainer->add_flag("--parallel-gradients", tc.parallel_gradients);
    trainer->add_option("--seed", tc.seed);
    trainer->add_option("-o,--output", model_out);
    trainer->add_option("--curve", curve_out, "Write the evaluation curve CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (gen_pi->parsed()) {
                PiOrientation o = pi_swapped ? PiOrientation::Swapped : PiOrientation::Standard;
                write_output(gen_out, serialize_task(pi_prime ? gen_pi_prime_n(pi_n, o) : gen_pi_n(pi_n, o)));
            } else if (gen_art->parsed()) {
                ArtificialInstance inst = gen_artificial(depth, branching, gen_seed);
                write_output(gen_out, serialize_task(inst.task));
                if (!witness_out.empty()) {
                    string w = "scripted:";
                    for (size_t i = 0; i < inst.witness.size(); ++i)
                        w += (i ? "," : "") + to_string(inst.witness[i]);
                    write_output(witness_out, w + "\n");
                }
            } else {
                TransportInstance inst = gen_transport(locations, packages, gen_seed);
                write_output(gen_out, serialize_task(inst.task));
                if (!witness_out.empty())
                    write_output(witness_out, serialize_plan(inst.task, inst.witness));
            }
        } else if (search->parsed()) {
            unique_ptr<Task> task = load_instance(task_arg);
            Portfolio portfolio = make_portfolio(*task, parse_portfolio_spec(*task, portfolio_arg));
            unique_ptr<ControlPolicy> policy = make_policy(policy_arg);
            SearchResult r = run_gbfs(*task, portfolio, *policy, make_budget(max_expansions, max_seconds));
            print_result(*task, r, trace_out, plan_out);
            return r.solved() ? 0 : 1;
        } else if (run->parsed()) {
            ExperimentConfig config = load_experiment_config(config_path);
            ExperimentSummary s = run_experiment(config, !serial);
            cerr << s.jobs << " jobs: " << s.executed << " executed, " << s.reused << " reused; results in "
                 << config.out_dir << '\n';
            cout << read_file((filesystem::path(config.out_dir) / "summary.txt").string());
        } else if (report->parsed()) {
            vector<RunRecord> records = load_records(report_in);
            if (report_format == "csv")
                cout << report_csv(records);
            else if (report_format == "json")
                cout << report_json(records);
            else
                cout << report_table(records);
        } else if (analyze->parsed()) {
            string csv = read_file(trace_in);
            size_t n = trace_num_heuristics(csv);
            vector<size_t> choices;
            for (const TraceRow &row : read_trace_csv(csv))
                choices.push_back(row.chosen);
            if (analysis == "usage") {
                auto q = usage_quarters(choices, n);
                cout << "quarter";
                for (size_t h = 0; h < n; ++h)
                    cout << ",h" << h;
                cout << '\n';
                for (size_t i = 0; i < q.size(); ++i) {
                    cout << i + 1;
                    for (double f : q[i])
                        printf(",%.4f", f);
                    cout << '\n';
                }
            } else {
                SwitchHistogram h = switch_frequency(choices);
                printf("immediate,high,medium,low\n%.4f,%.4f,%.4f,%.4f\n", h.immediate, h.high, h.medium, h.low);
            }
        } else if (serve->parsed()) {
            unique_ptr<Task> task = load_instance(task_arg);
            Portfolio portfolio = make_portfolio(*task, parse_portfolio_spec(*task, portfolio_arg));
            Listener listener(parse_endpoint(listen_arg));
            cerr << "waiting for a controller on " << listen_arg << '\n';
            SearchResult r =
                serve_search(*task, portfolio, listener, make_budget(max_expansions, max_seconds), timeout);
            print_result(*task, r, trace_out, plan_out);
            return r.solved() ? 0 : 1;
        } else if (control->parsed()) {
            unique_ptr<ControlPolicy> policy = make_policy(policy_arg);
            if (!connect_arg.empty()) {
                Connection conn = connect_to(parse_endpoint(connect_arg), timeout);
                ControllerSession s = run_controller(conn, *policy);
                cout << "steps " << s.steps << " outcome " << (s.outcome ? outcome_name(*s.outcome) : "none") << '\n';
            } else {
                if (control_listen.empty())
                    throw runtime_error("control needs --connect or --listen");
                Listener listener(parse_endpoint(control_listen));
                for (size_t i = 0; sessions == 0 || i < sessions; ++i) {
                    Connection conn = listener.accept();
                    conn.set_timeout(timeout);
                    ControllerSession s = run_controller(conn, *policy);
                    cout << "steps " << s.steps << " outcome "
                         << (s.outcome ? outcome_name(*s.outcome) : "none") << endl;
                }
            }
        } else if (trainer->parsed()) {
            tc.activation = parse_activation(activation);
            vector<unique_ptr<Task>> tasks;
            vector<const Task *> ptrs;
            for (const string &uri : train_instances) {
                tasks.push_back(load_instance(uri));
                ptrs.push_back(tasks.back().get());
            }
            TrainResult r = train(ptrs, parse_portfolio_spec(*ptrs.front(), portfolio_arg), tc);
            save_model(r.incumbent, model_out);
            string curve = "update_step,solved,instances,total_expansions\n";
            for (const EvalPoint &p : r.curve)
                curve += to_string(p.update_step) + "," + to_string(p.solved) + "," + to_string(p.instances) + "," +
                         to_string(p.total_expansions) + "\n";
            if (!curve_out.empty())
                write_output(curve_out, curve);
            cerr << r.updates << " updates over " << r.episodes << " episodes; model written to " << model_out
                 << '\n';
        }
    } catch (const exception &e) {
        cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
