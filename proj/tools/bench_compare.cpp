// Compares the serial reference paths against the OpenMP fan-out on the two
// data-parallel workloads: the random-model property battery and a noisy
// evaluation run over a replicated fixture dataset. Verifies that both paths
// produce identical results before timing them.

#include "ac/battery.hpp"
#include "ac/dataset.hpp"
#include "ac/evaluation.hpp"

#include <chrono>
#include <cstdio>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_row(const char* name, double serial, double parallel) {
    std::printf("%-22s  serial %8.3fs  parallel %8.3fs  speedup %5.2fx\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t battery_models = 400;
    std::size_t dataset_copies = 200;
    if (argc > 1) battery_models = std::stoul(argv[1]);
    if (argc > 2) dataset_copies = std::stoul(argv[2]);

#if defined(_OPENMP)
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
    std::printf("built without OpenMP; the parallel path degrades to serial\n");
#endif
    std::printf("threads: %d\n", threads);

    {
        ac::BatteryConfig config;
        config.models = battery_models;
        config.seed = 7;

        config.parallelism = 1;
        auto t0 = std::chrono::steady_clock::now();
        ac::BatteryReport serial = ac::run_battery(config);
        double serial_s = seconds_since(t0);

        config.parallelism = threads;
        t0 = std::chrono::steady_clock::now();
        ac::BatteryReport parallel = ac::run_battery(config);
        double parallel_s = seconds_since(t0);

        if (serial.checks_run != parallel.checks_run ||
            serial.violations.size() != parallel.violations.size()) {
            std::printf("MISMATCH: battery results differ between paths\n");
            return 1;
        }
        print_row("property battery", serial_s, parallel_s);
    }

    {
        ac::Dataset base = ac::fixtures::samples();
        ac::Dataset big;
        for (std::size_t i = 0; i < dataset_copies; ++i) {
            for (const auto& s : base.samples) big.samples.push_back(s);
        }

        ac::RunConfig config;
        config.annotator.kind = ac::AnnotatorConfig::Kind::Noisy;
        config.annotator.flips.sufficient = 0.25;
        config.annotator.flips.norm_violated = 0.25;
        config.annotator.seed = 11;

        config.parallelism = 1;
        auto t0 = std::chrono::steady_clock::now();
        auto serial = ac::run_dataset(big, config);
        double serial_s = seconds_since(t0);

        config.parallelism = threads;
        t0 = std::chrono::steady_clock::now();
        auto parallel = ac::run_dataset(big, config);
        double parallel_s = seconds_since(t0);

        for (std::size_t i = 0; i < serial.size(); ++i) {
            if (serial[i].predicted != parallel[i].predicted ||
                serial[i].failed != parallel[i].failed) {
                std::printf("MISMATCH: evaluation records differ at %zu\n", i);
                return 1;
            }
        }
        print_row("evaluation run", serial_s, parallel_s);
    }

    return 0;
}
