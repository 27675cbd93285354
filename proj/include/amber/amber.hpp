#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "amber/dataset.hpp"
#include "amber/nn.hpp"

namespace amber {

// Knobs for one elimination run. All internal seeds (ranker init/shuffle,
// per-iteration autoencoder seeds, scoring subsample) are derived from
// `seed`; the seed fields inside rm_train/ae_train are overwritten.
struct AmberConfig {
    std::size_t k = 1;              // units (features or groups) to eliminate
    bool use_redundancy = true;     // false = ranker-only variant
    bool retrain_rm = false;        // true = retrain the ranker every iteration
    bool overfit_mode = false;      // disables ranker early stopping, fixed epochs
    TrainConfig rm_train;
    TrainConfig ae_train;
    std::uint64_t seed = 0;
    // 0 = train/score the autoencoder on the full training set. Otherwise a
    // seeded class-stratified row subsample of this size is used for the
    // autoencoder pipeline (desk-scale option for wide datasets; relevance
    // scoring always sees the full set).
    std::size_t ae_sample_rows = 0;
};

struct SaliencyScores {
    std::vector<std::size_t> candidates;  // unit ids, ascending
    std::vector<double> relevance;
    std::vector<double> redundancy;  // empty when redundancy is disabled
    std::vector<double> saliency;
};

struct IterationRecord {
    std::size_t unit = 0;                 // eliminated unit id
    std::vector<std::size_t> eliminated;  // its feature indices
    SaliencyScores scores;
    double seconds = 0.0;
};

struct EliminationTrace {
    std::vector<IterationRecord> iterations;
    FeatureMask final_mask;
    std::vector<std::vector<std::size_t>> units;  // unit id -> feature indices

    // Mask after the first `eliminations` iterations.
    FeatureMask mask_after(std::size_t eliminations) const;
};

// Trains the ranker model on the full-width training set. overfit_mode
// disables early stopping so the run lasts exactly rm_train.max_epochs.
NetworkParams train_ranker(const Dataset& train, const std::vector<LayerSpec>& rm_spec,
                           const AmberConfig& cfg, TrainReport* report = nullptr);

// Mean ranker loss over the set with (eliminated + candidate) columns
// zeroed, one value per candidate feature-set. Higher = more relevant.
std::vector<double> relevance_scores(const NetworkParams& rm, const Matrix& x,
                                     const std::vector<int>& y, Loss loss,
                                     const FeatureMask& eliminated,
                                     const std::vector<std::vector<std::size_t>>& candidates);

// Fresh undercomplete autoencoder: m inputs -> (m-1) relu -> m linear,
// trained with mse on active_data. `iteration` salts the derived seed.
NetworkParams train_autoencoder(const Matrix& active_data, const AmberConfig& cfg,
                                std::size_t iteration);

// Reconstruction MSE against the untouched active_data when each candidate
// column set (positions within active_data) is zeroed at the input. Lower =
// more redundant.
std::vector<double> redundancy_scores(const NetworkParams& ae, const Matrix& active_data,
                                      const std::vector<std::vector<std::size_t>>& candidates);

// Each score vector is divided by its range (zero range collapses the vector
// to all zeros), then summed. Lower combined saliency = eliminated sooner.
std::vector<double> combine_saliency(const std::vector<double>& relevance,
                                     const std::vector<double>* redundancy);

// Candidate with minimal saliency; ties pick the lowest candidate id.
std::size_t eliminate_one(const SaliencyScores& scores);

// Full elimination loop: train ranker once (or per iteration when
// retrain_rm), then k rounds of score / combine / eliminate. The ranker
// keeps full input width with eliminated columns zeroed; the autoencoder
// shrinks with the active set.
EliminationTrace run_amber(const Dataset& train, const std::vector<LayerSpec>& rm_spec,
                           const AmberConfig& cfg);

}  // namespace amber
