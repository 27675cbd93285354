#include "amber/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "amber/errors.hpp"
#include "amber/rng.hpp"

namespace amber {

namespace {

constexpr std::uint64_t kSaltRank = 0xa3be2;
constexpr std::uint64_t kSaltFinal = 0xf17a1;
constexpr std::uint64_t kSaltTiming = 0x71e;
constexpr std::uint64_t kSaltRfsVal = 0x5ee1;

double now_between(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AmberConfig amber_config(Method method, const EvalProtocol& proto, std::size_t num_classes,
                         std::uint64_t seed, std::size_t k) {
    AmberConfig cfg;
    cfg.k = k;
    cfg.use_redundancy = method != Method::AmberRelevanceOnly;
    cfg.retrain_rm = method == Method::AmberRetrain;
    cfg.overfit_mode = proto.overfit_mode;
    cfg.rm_train = proto.rm_train;
    cfg.rm_train.loss = loss_for(num_classes);
    cfg.ae_train = proto.ae_train;
    cfg.ae_train.loss = Loss::Mse;
    cfg.seed = seed;
    cfg.ae_sample_rows = proto.ae_sample_rows;
    return cfg;
}

// Unit-level selection order, best first, for the one-shot ranking methods.
std::vector<std::size_t> ranked_units(Method method, const Dataset& train,
                                      const std::vector<std::vector<std::size_t>>& units,
                                      std::size_t sweep_k_features, const EvalProtocol& proto,
                                      std::uint64_t run_seed) {
    std::vector<double> unit_scores;
    switch (method) {
        case Method::Fisher: {
            FeatureRanking r = fisher_scores(train.X, train.y);
            unit_scores = group_scores_sum(r.scores, units);
            break;
        }
        case Method::Cmim: {
            DiscretizedMatrix d = discretize(train.X, proto.cmim_bins);
            FeatureRanking r = cmim_select(d, train.y, train.d());
            unit_scores = group_scores_sum(r.scores, units);
            break;
        }
        case Method::Rfs: {
            auto [sub, val] = split(train, 0.2, mix_seed(run_seed, kSaltRfsVal));
            TrainConfig ft = proto.final_train;
            ft.loss = loss_for(train.num_classes);
            ft.seed = mix_seed(run_seed, kSaltRfsVal + 1);
            std::vector<LayerSpec> spec =
                build_spec(sweep_k_features, proto.final_hidden, train.num_classes);
            SweepResult sweep = rfs_sweep(sub.X, sub.y, val.X, val.y, proto.rfs_gammas,
                                          sweep_k_features, spec, ft, proto.rfs_opts);
            unit_scores = group_scores_sum(sweep.ranking.scores, units);
            break;
        }
        case Method::Fqi: {
            AmberConfig cfg = amber_config(Method::Amber, proto, train.num_classes,
                                           mix_seed(run_seed, kSaltRank), 1);
            std::vector<LayerSpec> rm_spec =
                build_spec(train.d(), proto.rm_hidden, train.num_classes);
            NetworkParams rm = train_ranker(train, rm_spec, cfg);
            // groups are zeroed jointly, like the elimination loop does
            unit_scores = fqi_values(rm, train.X, units);
            break;
        }
        default:
            throw ConfigError("ranked_units: not a one-shot ranking method");
    }
    std::vector<std::size_t> order = order_by_score_desc(unit_scores);
    return order;
}

// Selection order best-first from an elimination trace: survivors (ascending
// id), then the eliminated units from last to first.
std::vector<std::size_t> amber_selection_order(const EliminationTrace& trace) {
    std::vector<std::size_t> order;
    std::vector<std::uint8_t> eliminated(trace.units.size(), 0);
    for (const auto& rec : trace.iterations) eliminated[rec.unit] = 1;
    for (std::size_t u = 0; u < trace.units.size(); ++u)
        if (!eliminated[u]) order.push_back(u);
    for (auto it = trace.iterations.rbegin(); it != trace.iterations.rend(); ++it)
        order.push_back(it->unit);
    return order;
}

double sample_variance(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace

EvalProtocol::EvalProtocol() {
    rm_train.learning_rate = 0.05;
    rm_train.batch_size = 32;
    rm_train.max_epochs = 400;
    rm_train.patience = 5;
    rm_train.validation_fraction = 0.1;

    ae_train.loss = Loss::Mse;
    ae_train.learning_rate = 0.05;
    ae_train.batch_size = 32;
    ae_train.max_epochs = 15;
    ae_train.patience = 0;
    ae_train.validation_fraction = 0.0;

    final_train = rm_train;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Fisher: return "fisher";
        case Method::Cmim: return "cmim";
        case Method::Rfs: return "rfs";
        case Method::Fqi: return "fqi";
        case Method::Amber: return "amber";
        case Method::AmberRelevanceOnly: return "amber_relevance_only";
        case Method::AmberRetrain: return "amber_retrain";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "fisher") return Method::Fisher;
    if (s == "cmim") return Method::Cmim;
    if (s == "rfs") return Method::Rfs;
    if (s == "fqi") return Method::Fqi;
    if (s == "amber") return Method::Amber;
    if (s == "amber_relevance_only") return Method::AmberRelevanceOnly;
    if (s == "amber_retrain") return Method::AmberRetrain;
    throw ConfigError("unknown method: " + s);
}

bool is_amber_variant(Method m) {
    return m == Method::Amber || m == Method::AmberRelevanceOnly || m == Method::AmberRetrain;
}

std::vector<LayerSpec> build_spec(std::size_t input_width, const std::vector<std::size_t>& hidden,
                                  std::size_t num_classes) {
    if (input_width == 0) throw ConfigError("build_spec: zero input width");
    if (num_classes < 2) throw ConfigError("build_spec: need at least 2 classes");
    std::vector<LayerSpec> spec;
    std::size_t in = input_width;
    for (std::size_t h : hidden) {
        spec.push_back({in, h, Activation::Relu});
        in = h;
    }
    if (num_classes == 2)
        spec.push_back({in, 1, Activation::Sigmoid});
    else
        spec.push_back({in, num_classes, Activation::Softmax});
    return spec;
}

Loss loss_for(std::size_t num_classes) {
    return num_classes == 2 ? Loss::BinaryCrossEntropy : Loss::CrossEntropy;
}

std::size_t top10_count(std::size_t d) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::llround(0.10 * static_cast<double>(d))));
}

double final_accuracy(const Dataset& train_set, const Dataset& test_set,
                      const std::vector<std::size_t>& selected,
                      const std::vector<std::size_t>& final_hidden,
                      const TrainConfig& final_train) {
    if (selected.empty()) throw ConfigError("final_accuracy: empty feature selection");
    FeatureMask mask(train_set.d());
    std::fill(mask.active.begin(), mask.active.end(), 0);
    for (std::size_t f : selected) {
        if (f >= train_set.d()) throw ShapeError("final_accuracy: feature index out of range");
        mask.active[f] = 1;
    }
    Matrix xt = mask_remove(train_set.X, mask);
    Matrix xe = mask_remove(test_set.X, mask);
    TrainConfig cfg = final_train;
    cfg.loss = loss_for(train_set.num_classes);
    std::vector<LayerSpec> spec = build_spec(xt.cols, final_hidden, train_set.num_classes);
    NetworkParams net = init_network(spec, mix_seed(cfg.seed, 1));
    cfg.seed = mix_seed(cfg.seed, 2);
    auto [trained, report] = train(net, xt, train_set.y, cfg);
    return evaluate_accuracy(trained, xe, test_set.y);
}

std::vector<std::vector<std::size_t>> select_at_counts(Method method, const Dataset& train,
                                                       const std::vector<std::size_t>& counts,
                                                       const EvalProtocol& proto,
                                                       std::uint64_t run_seed,
                                                       double* ranking_seconds) {
    if (counts.empty()) throw ConfigError("select_at_counts: empty count list");
    for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        if (counts[i] <= counts[i + 1])
            throw ConfigError("select_at_counts: feature counts must be strictly descending");
    if (counts.back() < 1 || counts.front() > train.d())
        throw ConfigError("select_at_counts: counts must lie in [1, d]");

    std::vector<std::vector<std::size_t>> units = elimination_units(train);
    const std::size_t min_count = counts.back();

    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order;  // best first
    if (is_amber_variant(method)) {
        // eliminate down to the smallest requested feature count; the count
        // must land exactly on a unit boundary
        std::size_t keep_units = 0;
        std::size_t feats = 0;
        for (std::size_t u = 0; u < units.size() && feats < min_count; ++u) {
            feats += units[u].size();
            ++keep_units;
        }
        if (feats != min_count)
            throw ConfigError("select_at_counts: count " + std::to_string(min_count) +
                              " does not align with group boundaries");
        if (keep_units == units.size()) {
            // only the full feature set was requested; nothing to eliminate
            order.resize(units.size());
            std::iota(order.begin(), order.end(), 0);
        } else {
            AmberConfig cfg = amber_config(method, proto, train.num_classes,
                                           mix_seed(run_seed, kSaltRank),
                                           units.size() - keep_units);
            EliminationTrace trace =
                run_amber(train, build_spec(train.d(), proto.rm_hidden, train.num_classes), cfg);
            order = amber_selection_order(trace);
        }
    } else {
        order = ranked_units(method, train, units, min_count, proto, run_seed);
    }
    if (ranking_seconds) *ranking_seconds = now_between(t0);

    // expand the unit order into nested feature sets at each requested count
    std::vector<std::vector<std::size_t>> result(counts.size());
    std::vector<std::size_t> features;
    std::size_t next_unit = 0;
    for (std::size_t ci = counts.size(); ci > 0; --ci) {
        std::size_t want = counts[ci - 1];
        while (features.size() < want && next_unit < order.size()) {
            const auto& u = units[order[next_unit++]];
            features.insert(features.end(), u.begin(), u.end());
        }
        if (features.size() != want)
            throw ConfigError("select_at_counts: count " + std::to_string(want) +
                              " does not align with group boundaries");
        result[ci - 1] = features;
        std::sort(result[ci - 1].begin(), result[ci - 1].end());
    }
    return result;
}

std::vector<CurvePoint> accuracy_curve(Method method, const Dataset& dataset,
                                       const std::vector<std::size_t>& feature_counts,
                                       std::size_t runs, const std::vector<std::uint64_t>& seeds,
                                       const EvalProtocol& proto) {
    if (runs == 0) throw ConfigError("accuracy_curve: runs must be >= 1");
    if (seeds.size() < runs) throw ConfigError("accuracy_curve: need one seed per run");

    std::vector<CurvePoint> points(feature_counts.size());
    for (std::size_t i = 0; i < feature_counts.size(); ++i) {
        points[i].feature_count = feature_counts[i];
        points[i].method = to_string(method);
    }

    for (std::size_t r = 0; r < runs; ++r) {
        std::uint64_t seed = seeds[r];
        auto [train, test] = split(dataset, proto.test_fraction, seed);
        NormStats stats = normalize_fit(train.X);
        train.X = normalize_apply(train.X, stats);
        test.X = normalize_apply(test.X, stats);

        auto selections = select_at_counts(method, train, feature_counts, proto, seed);
        for (std::size_t i = 0; i < feature_counts.size(); ++i) {
            TrainConfig ft = proto.final_train;
            ft.seed = mix_seed(mix_seed(seed, kSaltFinal), feature_counts[i]);
            double acc = final_accuracy(train, test, selections[i], proto.final_hidden, ft);
            points[i].per_run_accuracies.push_back(acc);
        }
    }
    for (auto& p : points) {
        double sum = std::accumulate(p.per_run_accuracies.begin(), p.per_run_accuracies.end(), 0.0);
        p.mean_accuracy = sum / static_cast<double>(p.per_run_accuracies.size());
    }
    return points;
}

TimingResult time_ranking(Method method, const Dataset& train, const EvalProtocol& proto,
                          std::size_t repeats, std::uint64_t seed) {
    if (repeats == 0) throw ConfigError("time_ranking: repeats must be >= 1");
    std::vector<std::vector<std::size_t>> units = elimination_units(train);

    TimingResult result;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        if (is_amber_variant(method)) {
            AmberConfig cfg = amber_config(method, proto, train.num_classes,
                                           mix_seed(seed, kSaltTiming + rep), units.size() - 1);
            run_amber(train, build_spec(train.d(), proto.rm_hidden, train.num_classes), cfg);
        } else if (method == Method::Fisher) {
            fisher_scores(train.X, train.y);
        } else if (method == Method::Cmim) {
            DiscretizedMatrix d = discretize(train.X, proto.cmim_bins);
            cmim_select(d, train.y, train.d());
        } else if (method == Method::Rfs) {
            double gamma = proto.rfs_gammas[proto.rfs_gammas.size() / 2];
            rfs_scores(train.X, train.y, gamma, proto.rfs_opts);
        } else {  // FQI: model training is part of producing the ranking
            AmberConfig cfg = amber_config(Method::Amber, proto, train.num_classes,
                                           mix_seed(seed, kSaltTiming + rep), 1);
            NetworkParams rm =
                train_ranker(train, build_spec(train.d(), proto.rm_hidden, train.num_classes), cfg);
            fqi_values(rm, train.X, units);
        }
        result.samples.push_back(now_between(t0));
    }
    double sum = std::accumulate(result.samples.begin(), result.samples.end(), 0.0);
    result.mean_seconds = sum / static_cast<double>(result.samples.size());
    result.variance = sample_variance(result.samples, result.mean_seconds);
    return result;
}

const MethodBench& BenchReport::row(Method m) const {
    for (const auto& [method, bench] : rows)
        if (method == m) return bench;
    throw ConfigError("BenchReport: method not present: " + to_string(m));
}

BenchReport compare_table(const std::vector<Method>& methods, const Dataset& dataset,
                          std::size_t runs, const std::vector<std::uint64_t>& seeds,
                          const EvalProtocol& proto, bool with_timing) {
    if (methods.empty()) throw ConfigError("compare_table: no methods");
    if (runs == 0) throw ConfigError("compare_table: runs must be >= 1");
    if (seeds.size() < runs) throw ConfigError("compare_table: need one seed per run");

    BenchReport report;
    report.k_keep = top10_count(dataset.d());
    report.runs = runs;
    report.seeds.assign(seeds.begin(), seeds.begin() + runs);
    for (Method m : methods) report.rows.emplace_back(m, MethodBench{});

    for (std::size_t r = 0; r < runs; ++r) {
        std::uint64_t seed = seeds[r];
        auto [train, test] = split(dataset, proto.test_fraction, seed);
        NormStats stats = normalize_fit(train.X);
        train.X = normalize_apply(train.X, stats);
        test.X = normalize_apply(test.X, stats);

        for (auto& [method, bench] : report.rows) {
            auto sel = select_at_counts(method, train, {report.k_keep}, proto, seed);
            TrainConfig ft = proto.final_train;
            ft.seed = mix_seed(mix_seed(seed, kSaltFinal), report.k_keep);
            bench.per_run_accuracies.push_back(
                final_accuracy(train, test, sel[0], proto.final_hidden, ft));
        }
    }
    for (auto& [method, bench] : report.rows) {
        double sum = std::accumulate(bench.per_run_accuracies.begin(),
                                     bench.per_run_accuracies.end(), 0.0);
        bench.mean_accuracy = sum / static_cast<double>(runs);
    }

    if (with_timing) {
        auto [train, test] = split(dataset, proto.test_fraction, seeds[0]);
        NormStats stats = normalize_fit(train.X);
        train.X = normalize_apply(train.X, stats);
        for (auto& [method, bench] : report.rows) {
            TimingResult t = time_ranking(method, train, proto, proto.timing_repeats,
                                          mix_seed(seeds[0], kSaltTiming));
            bench.ranking_seconds = t.mean_seconds;
            bench.ranking_seconds_variance = t.variance;
        }
    }
    return report;
}

}  // namespace amber
