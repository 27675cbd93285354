#include "amber/amber.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "amber/errors.hpp"
#include "amber/rng.hpp"
#include "amber/threads.hpp"

namespace amber {

namespace {

constexpr std::uint64_t kSaltRanker = 0x524d;
constexpr std::uint64_t kSaltAutoencoder = 0xae00;
constexpr std::uint64_t kSaltSample = 0x5a17;

TrainConfig derived(const TrainConfig& base, std::uint64_t seed) {
    TrainConfig cfg = base;
    cfg.seed = seed;
    return cfg;
}

NetworkParams train_ranker_seeded(const Dataset& train_set, const std::vector<LayerSpec>& rm_spec,
                                  const AmberConfig& cfg, std::uint64_t seed,
                                  TrainReport* report_out = nullptr) {
    if (rm_spec.empty() || rm_spec.front().input_width != train_set.d())
        throw ConfigError("ranker: spec input width must match the dataset");
    TrainConfig tc = derived(cfg.rm_train, mix_seed(seed, 2));
    if (cfg.overfit_mode) tc.patience = 0;
    NetworkParams net = init_network(rm_spec, mix_seed(seed, 1));
    auto [trained, report] = train(net, train_set.X, train_set.y, tc);
    if (report_out) *report_out = report;
    return trained;
}

// Class-stratified row subsample, ascending order; proportional allocation
// with largest-remainder rounding so the total lands exactly on `want`.
std::vector<std::size_t> stratified_rows(const Dataset& ds, std::size_t want, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.n(); ++i)
        by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);

    const double frac = static_cast<double>(want) / static_cast<double>(ds.n());
    std::vector<std::size_t> take(by_class.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t total = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        double exact = frac * static_cast<double>(by_class[c].size());
        take[c] = std::min<std::size_t>(static_cast<std::size_t>(exact), by_class[c].size());
        total += take[c];
        remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [rem, c] : remainders) {
        if (total >= want) break;
        if (take[c] < by_class[c].size()) {
            ++take[c];
            ++total;
        }
    }
    std::vector<std::size_t> rows;
    rows.reserve(total);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        Rng rng(mix_seed(seed, 0x9000 + c));
        rng.shuffle(by_class[c]);
        rows.insert(rows.end(), by_class[c].begin(), by_class[c].begin() + take[c]);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

Matrix gather(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(x.row(rows[i]), x.row(rows[i]) + x.cols, out.row(i));
    return out;
}

void check_finite_nonneg(const std::vector<double>& v, const char* what) {
    for (double s : v)
        if (!std::isfinite(s) || s < 0.0)
            throw NumericError(std::string(what) + ": non-finite or negative score");
}

}  // namespace

FeatureMask EliminationTrace::mask_after(std::size_t eliminations) const {
    FeatureMask mask(final_mask.size());
    for (std::size_t i = 0; i < eliminations && i < iterations.size(); ++i)
        for (std::size_t f : iterations[i].eliminated) mask.active[f] = 0;
    return mask;
}

NetworkParams train_ranker(const Dataset& train_set, const std::vector<LayerSpec>& rm_spec,
                           const AmberConfig& cfg, TrainReport* report) {
    return train_ranker_seeded(train_set, rm_spec, cfg, mix_seed(cfg.seed, kSaltRanker), report);
}

std::vector<double> relevance_scores(const NetworkParams& rm, const Matrix& x,
                                     const std::vector<int>& y, Loss loss,
                                     const FeatureMask& eliminated,
                                     const std::vector<std::vector<std::size_t>>& candidates) {
    if (rm.input_width() != x.cols) throw ShapeError("relevance: ranker width mismatch");
    for (const auto& cand : candidates)
        for (std::size_t f : cand)
            if (f >= eliminated.size() || !eliminated.active[f])
                throw std::logic_error("relevance: candidate feature " + std::to_string(f) +
                                       " already eliminated or out of range");

    Matrix masked = mask_zero(x, eliminated);
    FirstLayerCache cache(rm, masked);
    std::vector<double> scores(candidates.size(), 0.0);
    parallel_for(candidates.size(), [&](std::size_t c) {
        Matrix out = cache.forward_zeroed(candidates[c]);
        scores[c] = loss_value(out, y, loss);
    });
    check_finite_nonneg(scores, "relevance");
    return scores;
}

NetworkParams train_autoencoder(const Matrix& active_data, const AmberConfig& cfg,
                                std::size_t iteration) {
    const std::size_t m = active_data.cols;
    if (m < 2) throw ConfigError("autoencoder: need at least 2 active features");
    std::vector<LayerSpec> spec = {{m, m - 1, Activation::Relu}, {m - 1, m, Activation::Linear}};
    std::uint64_t seed = mix_seed(cfg.seed, kSaltAutoencoder + iteration);
    TrainConfig tc = derived(cfg.ae_train, mix_seed(seed, 2));
    tc.loss = Loss::Mse;
    NetworkParams net = init_network(spec, mix_seed(seed, 1));
    // Small init so correlated columns end up sharing reconstruction weight:
    // gradient descent never changes the weight difference between identical
    // columns, so the initial asymmetry must be small against the learned
    // scale. The positive hidden bias keeps relu units alive on standardized
    // data.
    for (auto& w : net.weights)
        for (double& v : w.v) v *= 0.1;
    for (double& b : net.biases[0]) b = 0.5;
    auto [trained, report] = train(net, active_data, active_data, tc);
    return trained;
}

std::vector<double> redundancy_scores(const NetworkParams& ae, const Matrix& active_data,
                                      const std::vector<std::vector<std::size_t>>& candidates) {
    if (ae.input_width() != active_data.cols) throw ShapeError("redundancy: ae width mismatch");
    for (const auto& cand : candidates)
        for (std::size_t f : cand)
            if (f >= active_data.cols)
                throw ShapeError("redundancy: candidate column out of range");

    FirstLayerCache cache(ae, active_data);
    // zeroing an all-zero column cannot change the reconstruction
    std::vector<std::uint8_t> col_has_value(active_data.cols, 0);
    for (std::size_t i = 0; i < active_data.rows; ++i) {
        const double* r = active_data.row(i);
        for (std::size_t j = 0; j < active_data.cols; ++j)
            if (r[j] != 0.0) col_has_value[j] = 1;
    }
    double baseline = loss_value(cache.forward_zeroed({}), active_data, Loss::Mse);

    std::vector<double> scores(candidates.size(), 0.0);
    parallel_for(candidates.size(), [&](std::size_t c) {
        bool all_zero = true;
        for (std::size_t f : candidates[c])
            if (col_has_value[f]) all_zero = false;
        if (all_zero) {
            scores[c] = baseline;
            return;
        }
        Matrix out = cache.forward_zeroed(candidates[c]);
        scores[c] = loss_value(out, active_data, Loss::Mse);
    });
    check_finite_nonneg(scores, "redundancy");
    return scores;
}

std::vector<double> combine_saliency(const std::vector<double>& relevance,
                                     const std::vector<double>* redundancy) {
    if (redundancy && redundancy->size() != relevance.size())
        throw ShapeError("combine_saliency: score length mismatch");
    auto normalized = [](const std::vector<double>& v) {
        std::vector<double> out(v.size(), 0.0);
        if (v.empty()) return out;
        auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        double range = *mx - *mn;
        if (range == 0.0) return out;  // no discriminating information
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / range;
        return out;
    };
    std::vector<double> saliency = normalized(relevance);
    if (redundancy) {
        std::vector<double> red = normalized(*redundancy);
        for (std::size_t i = 0; i < saliency.size(); ++i) saliency[i] += red[i];
    }
    return saliency;
}

std::size_t eliminate_one(const SaliencyScores& scores) {
    if (scores.candidates.empty()) throw ConfigError("eliminate_one: no candidates");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.saliency.size(); ++i)
        if (scores.saliency[i] < scores.saliency[best]) best = i;
    return scores.candidates[best];
}

EliminationTrace run_amber(const Dataset& train_set, const std::vector<LayerSpec>& rm_spec,
                           const AmberConfig& cfg) {
    train_set.validate();
    std::vector<std::vector<std::size_t>> units = elimination_units(train_set);
    if (cfg.k < 1 || cfg.k >= units.size())
        throw ConfigError("amber: k must be in [1, units-1]; got k=" + std::to_string(cfg.k) +
                          " with " + std::to_string(units.size()) + " units");

    EliminationTrace trace;
    trace.units = units;
    trace.final_mask = FeatureMask(train_set.d());

    NetworkParams rm;
    if (!cfg.retrain_rm) rm = train_ranker(train_set, rm_spec, cfg);

    // fixed scoring rows for the autoencoder pipeline (whole run)
    std::vector<std::size_t> ae_rows;
    bool subsampled = cfg.ae_sample_rows > 0 && cfg.ae_sample_rows < train_set.n();
    if (subsampled) ae_rows = stratified_rows(train_set, cfg.ae_sample_rows, mix_seed(cfg.seed, kSaltSample));

    FeatureMask mask(train_set.d());
    std::vector<std::size_t> remaining(units.size());
    std::iota(remaining.begin(), remaining.end(), 0);

    for (std::size_t iter = 1; iter <= cfg.k; ++iter) {
        auto t0 = std::chrono::steady_clock::now();

        if (cfg.retrain_rm) {
            Dataset masked_train = train_set;
            masked_train.X = mask_zero(train_set.X, mask);
            rm = train_ranker_seeded(masked_train, rm_spec, cfg,
                                     mix_seed(cfg.seed, kSaltRanker + iter));
        }

        SaliencyScores scores;
        scores.candidates = remaining;
        std::vector<std::vector<std::size_t>> candidate_sets;
        candidate_sets.reserve(remaining.size());
        for (std::size_t u : remaining) candidate_sets.push_back(units[u]);

        scores.relevance =
            relevance_scores(rm, train_set.X, train_set.y, cfg.rm_train.loss, mask, candidate_sets);

        if (cfg.use_redundancy) {
            const Matrix& base = train_set.X;
            Matrix active = subsampled ? mask_remove(gather(base, ae_rows), mask)
                                       : mask_remove(base, mask);
            NetworkParams ae = train_autoencoder(active, cfg, iter);

            // candidate feature ids -> positions among active columns
            std::vector<std::size_t> position(train_set.d(), 0);
            std::size_t pos = 0;
            for (std::size_t f = 0; f < train_set.d(); ++f)
                if (mask.active[f]) position[f] = pos++;
            std::vector<std::vector<std::size_t>> candidate_positions = candidate_sets;
            for (auto& cand : candidate_positions)
                for (std::size_t& f : cand) f = position[f];

            scores.redundancy = redundancy_scores(ae, active, candidate_positions);
        }

        scores.saliency = combine_saliency(scores.relevance,
                                           cfg.use_redundancy ? &scores.redundancy : nullptr);

        std::size_t unit = eliminate_one(scores);
        for (std::size_t f : units[unit]) mask.active[f] = 0;
        remaining.erase(std::remove(remaining.begin(), remaining.end(), unit), remaining.end());

        IterationRecord rec;
        rec.unit = unit;
        rec.eliminated = units[unit];
        rec.scores = std::move(scores);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.iterations.push_back(std::move(rec));
    }

    trace.final_mask = mask;
    return trace;
}

}  // namespace amber
