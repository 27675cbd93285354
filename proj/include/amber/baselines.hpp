#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amber/matrix.hpp"
#include "amber/nn.hpp"

namespace amber {

// Per-feature saliency plus the induced ranking (descending score, ties by
// lowest feature id).
struct FeatureRanking {
    std::string method;
    std::vector<double> scores;
    std::vector<std::size_t> order;
};

std::vector<std::size_t> order_by_score_desc(const std::vector<double>& scores);

struct DiscretizedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<int> bins;  // row-major
    int bin_count = 0;

    int at(std::size_t r, std::size_t c) const { return bins[r * cols + c]; }
    std::vector<int> column(std::size_t c) const;
};

FeatureRanking fisher_scores(const Matrix& x, const std::vector<int>& y);

// Equal-frequency binning; ties go to the lower bin, so bins depend only on
// the value order within each column.
DiscretizedMatrix discretize(const Matrix& x, int bin_count);

// Plug-in Shannon estimates over discrete vectors, natural log, 0 log 0 = 0.
double mutual_information(const std::vector<int>& a, const std::vector<int>& b);
double conditional_mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                                      const std::vector<int>& c);

// Greedy selection: first the feature maximizing I(f;y), then repeatedly the
// feature maximizing min over selected s of I(f;y|s). Selected features get
// scores d - position; unselected features keep score 0 and rank after.
FeatureRanking cmim_select(const DiscretizedMatrix& d, const std::vector<int>& y,
                           std::size_t k_select);

struct RfsOptions {
    std::size_t max_iterations = 50;
    double tolerance = 1e-6;
};

// Joint L2,1-norm regression solved by iteratively reweighted least squares;
// each iteration reweights by residual and coefficient row norms (floored at
// 1e-8) and does one SPD solve of size min(d, n). Scores are the row norms
// of the solution.
FeatureRanking rfs_scores(const Matrix& x, const std::vector<int>& y, double gamma,
                          const RfsOptions& opts = {});

struct SweepResult {
    double gamma = 0.0;
    FeatureRanking ranking;
    double val_accuracy = 0.0;
};

// Runs rfs_scores per gamma, trains the final architecture on the top k_keep
// features, and keeps the gamma with the highest validation accuracy (ties
// pick the smaller gamma).
SweepResult rfs_sweep(const Matrix& x_train, const std::vector<int>& y_train,
                      const Matrix& x_val, const std::vector<int>& y_val,
                      const std::vector<double>& gammas, std::size_t k_keep,
                      const std::vector<LayerSpec>& final_spec, const TrainConfig& final_train,
                      const RfsOptions& opts = {});

// Output-sensitivity values: for each candidate column set, the summed
// squared change in the model output when those columns are zeroed.
std::vector<double> fqi_values(const NetworkParams& model, const Matrix& x,
                               const std::vector<std::vector<std::size_t>>& candidates);

FeatureRanking fqi_scores(const NetworkParams& model, const Matrix& x);

// Per-unit score = sum of member feature scores.
std::vector<double> group_scores_sum(const std::vector<double>& feature_scores,
                                     const std::vector<std::vector<std::size_t>>& units);

}  // namespace amber
