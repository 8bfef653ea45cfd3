// Serial vs OpenMP timings for the TD gradient kernel and the experiment runner.

#include "dhs/experiment.hpp"
#include "dhs/mlp.hpp"

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

using namespace std;
using namespace dhs;

static double time_kernel(bool parallel, const Mlp &net, const vector<TdSample> &batch, vector<double> &grad,
                          int reps) {
    double start = omp_get_wtime();
    for (int r = 0; r < reps; ++r) {
        if (parallel)
            td_gradients_parallel(net, batch, grad);
        else
            td_gradients_serial(net, batch, grad);
    }
    return (omp_get_wtime() - start) / reps;
}

static void bench_gradients() {
    printf("td gradient kernel (input 21, hidden 75x75, 4 outputs), %d threads\n", omp_get_max_threads());
    printf("%8s %12s %12s %8s %10s\n", "batch", "serial_ms", "omp_ms", "speedup", "identical");
    mt19937_64 rng(7);
    Mlp net({21, 75, 75, 4});
    net.initialize(rng);
    normal_distribution<double> noise(0.0, 1.0);
    for (size_t b : {32, 256, 1024, 4096}) {
        vector<vector<double>> inputs(b, vector<double>(21));
        vector<TdSample> batch;
        for (size_t i = 0; i < b; ++i) {
            for (double &x : inputs[i])
                x = noise(rng);
            batch.push_back({inputs[i], i % 4, noise(rng)});
        }
        vector<double> g1(net.num_params()), g2(net.num_params());
        int reps = static_cast<int>(max<size_t>(4, 20000 / b));
        double ts = time_kernel(false, net, batch, g1, reps);
        double tp = time_kernel(true, net, batch, g2, reps);
        printf("%8zu %12.4f %12.4f %8.2f %10s\n", b, ts * 1e3, tp * 1e3, ts / tp, g1 == g2 ? "yes" : "NO");
    }
}

static void bench_experiment() {
    ExperimentConfig config;
    for (int s = 0; s < 8; ++s)
        config.instances.push_back("transport:8:4:" + to_string(s));
    config.policies = {"alt:all", "single:0", "single:1", "single:2", "single:3", "argmin-mu"};
    config.max_expansions = 20000;
    config.workers = omp_get_max_threads();
    printf("\nexperiment runner: %zu instances x %zu policy specs (alt:all expanded), workers %d\n",
           config.instances.size(), config.policies.size(), config.workers);
    auto dir = filesystem::temp_directory_path() / "dhs_bench_experiment";
    double times[2];
    for (int parallel = 0; parallel < 2; ++parallel) {
        filesystem::remove_all(dir);
        config.out_dir = dir.string();
        double start = omp_get_wtime();
        ExperimentSummary s = run_experiment(config, parallel == 1);
        times[parallel] = omp_get_wtime() - start;
        printf("%-9s %zu jobs in %.3f s\n", parallel ? "parallel" : "serial", s.jobs, times[parallel]);
    }
    printf("speedup %.2f\n", times[0] / times[1]);
    filesystem::remove_all(dir);
}

int main() {
    bench_gradients();
    bench_experiment();
}
