#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amber/amber.hpp"
#include "amber/baselines.hpp"
#include "amber/dataset.hpp"

namespace amber {

enum class Method { Fisher, Cmim, Rfs, Fqi, Amber, AmberRelevanceOnly, AmberRetrain };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
bool is_amber_variant(Method m);

// Shared experiment knobs. Hidden widths are instantiated against the input
// width at hand; two-class problems get a single sigmoid output trained with
// binary cross-entropy, everything else softmax with cross-entropy.
struct EvalProtocol {
    std::vector<std::size_t> rm_hidden{16, 8, 6};
    std::vector<std::size_t> final_hidden{16, 8, 6};
    TrainConfig rm_train;
    TrainConfig ae_train;
    TrainConfig final_train;
    double test_fraction = 0.2;
    int cmim_bins = 5;
    std::vector<double> rfs_gammas{1e-3, 1e-1, 10.0, 1000.0};
    RfsOptions rfs_opts;
    std::size_t ae_sample_rows = 0;  // see AmberConfig
    bool overfit_mode = false;
    std::size_t timing_repeats = 3;

    EvalProtocol();
};

std::vector<LayerSpec> build_spec(std::size_t input_width, const std::vector<std::size_t>& hidden,
                                  std::size_t num_classes);
Loss loss_for(std::size_t num_classes);

// Train the final architecture on the selected columns and report test
// accuracy. Both sets must already be normalized with train statistics.
double final_accuracy(const Dataset& train, const Dataset& test,
                      const std::vector<std::size_t>& selected,
                      const std::vector<std::size_t>& final_hidden, const TrainConfig& final_train);

// Feature sets a method selects at each requested feature count (counts
// descending). One ranking / elimination run is shared across the counts.
// ranking_seconds, when non-null, receives the wall time of that run.
std::vector<std::vector<std::size_t>> select_at_counts(Method method, const Dataset& train,
                                                       const std::vector<std::size_t>& counts,
                                                       const EvalProtocol& proto,
                                                       std::uint64_t run_seed,
                                                       double* ranking_seconds = nullptr);

struct CurvePoint {
    std::size_t feature_count = 0;
    double mean_accuracy = 0.0;
    std::vector<double> per_run_accuracies;
    std::string method;
};

std::vector<CurvePoint> accuracy_curve(Method method, const Dataset& dataset,
                                       const std::vector<std::size_t>& feature_counts,
                                       std::size_t runs, const std::vector<std::uint64_t>& seeds,
                                       const EvalProtocol& proto);

struct TimingResult {
    double mean_seconds = 0.0;
    double variance = 0.0;
    std::vector<double> samples;
};

// Wall time to rank every feature (elimination methods run down to one
// remaining unit; filters score once). Dataset must be the normalized
// training split; final-model training is not included.
TimingResult time_ranking(Method method, const Dataset& train, const EvalProtocol& proto,
                          std::size_t repeats, std::uint64_t seed);

struct MethodBench {
    std::vector<double> per_run_accuracies;
    double mean_accuracy = 0.0;
    double ranking_seconds = 0.0;
    double ranking_seconds_variance = 0.0;
};

struct BenchReport {
    std::size_t k_keep = 0;
    std::size_t runs = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<Method, MethodBench>> rows;

    const MethodBench& row(Method m) const;
};

// Top-10% accuracy comparison plus (optionally) ranking-time measurements.
// Every method sees bitwise-identical normalized splits and the same
// final-model seed within a run.
BenchReport compare_table(const std::vector<Method>& methods, const Dataset& dataset,
                          std::size_t runs, const std::vector<std::uint64_t>& seeds,
                          const EvalProtocol& proto, bool with_timing = true);

// round(0.10 * d), at least 1
std::size_t top10_count(std::size_t d);

}  // namespace amber
