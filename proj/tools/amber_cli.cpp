// Command-line front end: feature selection, accuracy curves, method
// comparisons, and ranking-time benchmarks over CSV / IDX / synthetic
// datasets. Batch only; every run writes a manifest that reproduces it.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>

#include "amber/amber.hpp"
#include "amber/baselines.hpp"
#include "amber/dataset.hpp"
#include "amber/errors.hpp"
#include "amber/eval.hpp"
#include "amber/rng.hpp"
#include "amber/synthetic.hpp"
#include "amber/trace_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    json raw;  // config echo for the manifest
    json dataset;
    std::string method;                // select / curve
    std::vector<std::string> methods;  // compare / bench-time
    std::size_t k = 0;
    std::vector<std::size_t> feature_counts;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::string out = "out";
    bool timing = true;  // compare: also measure rank-all wall time
    amber::EvalProtocol proto;
};

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!obj.is_object()) throw amber::ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw amber::ConfigError(where + ": unknown field '" + key + "'");
}

template <typename T>
T get_field(const json& obj, const std::string& key, const T& fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw amber::ConfigError("field '" + key + "' has the wrong type");
    }
}

amber::TrainConfig parse_train(const json& obj, const amber::TrainConfig& defaults,
                               const std::string& where) {
    require_keys(obj, {"learning_rate", "batch_size", "max_epochs", "patience",
                       "validation_fraction"},
                 where);
    amber::TrainConfig cfg = defaults;
    cfg.learning_rate = get_field(obj, "learning_rate", cfg.learning_rate);
    cfg.batch_size = get_field(obj, "batch_size", cfg.batch_size);
    cfg.max_epochs = get_field(obj, "max_epochs", cfg.max_epochs);
    cfg.patience = get_field(obj, "patience", cfg.patience);
    cfg.validation_fraction = get_field(obj, "validation_fraction", cfg.validation_fraction);
    if (cfg.learning_rate <= 0) throw amber::ConfigError(where + ".learning_rate must be positive");
    if (cfg.batch_size == 0) throw amber::ConfigError(where + ".batch_size must be positive");
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    json j = json::parse(amber::read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw amber::ConfigError("config: invalid json in " + path);
    require_keys(j, {"dataset", "method", "methods", "k", "feature_counts", "runs", "seed",
                     "test_fraction", "out", "rm_hidden", "final_hidden", "rm_train", "ae_train",
                     "final_train", "overfit_mode", "ae_sample_rows", "cmim_bins", "rfs_gammas",
                     "timing_repeats", "timing"},
                 "config");
    RunConfig cfg;
    cfg.raw = j;
    if (!j.contains("dataset")) throw amber::ConfigError("config: missing field 'dataset'");
    cfg.dataset = j.at("dataset");
    cfg.method = get_field<std::string>(j, "method", "amber");
    cfg.methods = get_field<std::vector<std::string>>(j, "methods", {});
    cfg.k = get_field<std::size_t>(j, "k", 0);
    cfg.feature_counts = get_field<std::vector<std::size_t>>(j, "feature_counts", {});
    cfg.runs = get_field<std::size_t>(j, "runs", 1);
    cfg.seed = get_field<std::uint64_t>(j, "seed", 0);
    cfg.out = get_field<std::string>(j, "out", "out");
    cfg.proto.test_fraction = get_field(j, "test_fraction", cfg.proto.test_fraction);
    cfg.proto.rm_hidden = get_field(j, "rm_hidden", cfg.proto.rm_hidden);
    cfg.proto.final_hidden = get_field(j, "final_hidden", cfg.proto.final_hidden);
    if (j.contains("rm_train"))
        cfg.proto.rm_train = parse_train(j["rm_train"], cfg.proto.rm_train, "rm_train");
    if (j.contains("ae_train"))
        cfg.proto.ae_train = parse_train(j["ae_train"], cfg.proto.ae_train, "ae_train");
    if (j.contains("final_train"))
        cfg.proto.final_train = parse_train(j["final_train"], cfg.proto.final_train, "final_train");
    cfg.proto.overfit_mode = get_field(j, "overfit_mode", false);
    cfg.proto.ae_sample_rows = get_field<std::size_t>(j, "ae_sample_rows", 0);
    cfg.proto.cmim_bins = get_field(j, "cmim_bins", cfg.proto.cmim_bins);
    cfg.proto.rfs_gammas = get_field(j, "rfs_gammas", cfg.proto.rfs_gammas);
    cfg.proto.timing_repeats =
        get_field<std::size_t>(j, "timing_repeats", cfg.proto.timing_repeats);
    cfg.timing = get_field(j, "timing", true);
    return cfg;
}

amber::Dataset load_dataset(const json& spec) {
    require_keys(spec, {"kind", "path", "label_column", "has_header", "groups", "images", "labels",
                        "generator", "n", "features", "gen_seed"},
                 "dataset");
    std::string kind = get_field<std::string>(spec, "kind", "");
    amber::Dataset ds;
    if (kind == "csv") {
        std::string path = get_field<std::string>(spec, "path", "");
        if (path.empty()) throw amber::ConfigError("dataset.path is required for kind=csv");
        bool has_header = get_field(spec, "has_header", true);
        amber::LabelColumn label;
        if (spec.contains("label_column") && spec["label_column"].is_number_unsigned())
            label = spec["label_column"].get<std::size_t>();
        else
            label = get_field<std::string>(spec, "label_column", "label");
        ds = amber::load_csv(path, label, has_header);
    } else if (kind == "idx") {
        std::string images = get_field<std::string>(spec, "images", "");
        std::string labels = get_field<std::string>(spec, "labels", "");
        if (images.empty() || labels.empty())
            throw amber::ConfigError("dataset.images and dataset.labels are required for kind=idx");
        ds = amber::load_idx(images, labels);
    } else if (kind == "synthetic") {
        std::string gen = get_field<std::string>(spec, "generator", "");
        std::size_t n = get_field<std::size_t>(spec, "n", 500);
        std::uint64_t gs = get_field<std::uint64_t>(spec, "gen_seed", 1);
        if (gen == "duplicate-feature") {
            ds = amber::gen_duplicate_feature(n, gs);
        } else if (gen == "single-informative") {
            ds = amber::gen_single_informative(n, get_field<std::size_t>(spec, "features", 8), gs);
        } else if (gen == "paired-groups") {
            std::size_t feats = get_field<std::size_t>(spec, "features", 8);
            if (feats % 2)
                throw amber::ConfigError("dataset.features must be even for paired-groups");
            ds = amber::gen_paired_groups(n, feats / 2, gs);
        } else {
            throw amber::ConfigError("dataset.generator must be one of duplicate-feature, "
                                     "single-informative, paired-groups");
        }
    } else {
        throw amber::ConfigError("dataset.kind must be one of csv, idx, synthetic");
    }

    std::string groups = get_field<std::string>(spec, "groups", "none");
    if (groups == "paired-halves") {
        if (ds.d() % 2) throw amber::ConfigError("dataset.groups=paired-halves needs even width");
        ds.groups.clear();
        for (std::size_t i = 0; i < ds.d() / 2; ++i) ds.groups.push_back({i, i + ds.d() / 2});
        ds.validate();
    } else if (groups != "none") {
        throw amber::ConfigError("dataset.groups must be 'none' or 'paired-halves'");
    }
    return ds;
}

std::vector<std::uint64_t> run_seeds(const RunConfig& cfg) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < cfg.runs; ++r) seeds.push_back(amber::mix_seed(cfg.seed, 1000 + r));
    return seeds;
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
    json m;
    m["artifact_version"] = kVersion;
    m["command"] = command;
    m["config"] = cfg.raw;
    m["seed"] = cfg.seed;
    m["run_seeds"] = run_seeds(cfg);
    amber::write_text_file(cfg.out + "/manifest.json", m.dump(2) + "\n");
}

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out); }

// ---- subcommands ----------------------------------------------------------

int cmd_select(const RunConfig& cfg) {
    amber::Dataset full = load_dataset(cfg.dataset);
    amber::Method method = amber::method_from_string(cfg.method);
    std::uint64_t seed = run_seeds(cfg)[0];

    auto [train_set, test_set] = amber::split(full, cfg.proto.test_fraction, seed);
    amber::NormStats stats = amber::normalize_fit(train_set.X);
    train_set.X = amber::normalize_apply(train_set.X, stats);
    test_set.X = amber::normalize_apply(test_set.X, stats);

    ensure_out(cfg);
    write_manifest(cfg, "select");
    std::string summary;
    if (amber::is_amber_variant(method)) {
        auto units = amber::elimination_units(train_set);
        if (cfg.k == 0) throw amber::ConfigError("field 'k' is required for " + cfg.method);
        amber::AmberConfig acfg;
        acfg.k = cfg.k;
        acfg.use_redundancy = method != amber::Method::AmberRelevanceOnly;
        acfg.retrain_rm = method == amber::Method::AmberRetrain;
        acfg.overfit_mode = cfg.proto.overfit_mode;
        acfg.rm_train = cfg.proto.rm_train;
        acfg.rm_train.loss = amber::loss_for(train_set.num_classes);
        acfg.ae_train = cfg.proto.ae_train;
        acfg.seed = seed;
        acfg.ae_sample_rows = cfg.proto.ae_sample_rows;
        amber::EliminationTrace trace = amber::run_amber(
            train_set, amber::build_spec(train_set.d(), cfg.proto.rm_hidden, train_set.num_classes),
            acfg);
        amber::write_text_file(cfg.out + "/trace.json", amber::trace_to_json(trace));
        summary += "method: " + cfg.method + "\n";
        summary += "eliminated " + std::to_string(trace.iterations.size()) + " of " +
                   std::to_string(units.size()) + " units\n";
        for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
            const auto& rec = trace.iterations[i];
            summary += "iteration " + std::to_string(i + 1) + ": unit " + std::to_string(rec.unit) +
                       " (features";
            for (std::size_t f : rec.eliminated) summary += " " + train_set.feature_names[f];
            char buf[64];
            std::snprintf(buf, sizeof buf, "), %.3fs", rec.seconds);
            summary += buf;
            summary += "\n";
        }
        summary += "surviving features:";
        for (std::size_t f : trace.final_mask.active_indices())
            summary += " " + train_set.feature_names[f];
        summary += "\n";
    } else {
        amber::FeatureRanking ranking;
        if (method == amber::Method::Fisher) {
            ranking = amber::fisher_scores(train_set.X, train_set.y);
        } else if (method == amber::Method::Cmim) {
            ranking = amber::cmim_select(amber::discretize(train_set.X, cfg.proto.cmim_bins),
                                         train_set.y, train_set.d());
        } else if (method == amber::Method::Rfs) {
            ranking = amber::rfs_scores(train_set.X, train_set.y,
                                        cfg.proto.rfs_gammas[cfg.proto.rfs_gammas.size() / 2],
                                        cfg.proto.rfs_opts);
        } else {
            amber::AmberConfig acfg;
            acfg.rm_train = cfg.proto.rm_train;
            acfg.rm_train.loss = amber::loss_for(train_set.num_classes);
            acfg.seed = seed;
            amber::NetworkParams rm = amber::train_ranker(
                train_set,
                amber::build_spec(train_set.d(), cfg.proto.rm_hidden, train_set.num_classes), acfg);
            ranking = amber::fqi_scores(rm, train_set.X);
        }
        amber::write_text_file(cfg.out + "/ranking.json", amber::ranking_to_json(ranking));
        summary += "method: " + cfg.method + "\n";
        summary += "ranking (best first):";
        for (std::size_t f : ranking.order) summary += " " + train_set.feature_names[f];
        summary += "\n";
    }
    amber::write_text_file(cfg.out + "/summary.txt", summary);
    std::fputs(summary.c_str(), stdout);
    return 0;
}

int cmd_curve(const RunConfig& cfg) {
    amber::Dataset full = load_dataset(cfg.dataset);
    amber::Method method = amber::method_from_string(cfg.method);
    if (cfg.feature_counts.empty())
        throw amber::ConfigError("field 'feature_counts' is required for curve");
    auto seeds = run_seeds(cfg);
    auto points =
        amber::accuracy_curve(method, full, cfg.feature_counts, cfg.runs, seeds, cfg.proto);
    ensure_out(cfg);
    write_manifest(cfg, "curve");

    std::string csv = "method,feature_count,run,accuracy\n";
    for (const auto& p : points)
        for (std::size_t r = 0; r < p.per_run_accuracies.size(); ++r) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f\n", p.method.c_str(), p.feature_count,
                          r, p.per_run_accuracies[r]);
            csv += buf;
        }
    amber::write_text_file(cfg.out + "/curve.csv", csv);

    json summary;
    summary["method"] = cfg.method;
    for (const auto& p : points)
        summary["points"].push_back({{"feature_count", p.feature_count},
                                     {"mean_accuracy", p.mean_accuracy},
                                     {"per_run", p.per_run_accuracies}});
    amber::write_text_file(cfg.out + "/summary.json", summary.dump(2) + "\n");

    std::printf("%-22s %8s %10s\n", "method", "features", "accuracy");
    for (const auto& p : points)
        std::printf("%-22s %8zu %10.4f\n", p.method.c_str(), p.feature_count, p.mean_accuracy);
    return 0;
}

std::vector<amber::Method> parse_methods(const RunConfig& cfg) {
    std::vector<amber::Method> methods;
    if (cfg.methods.empty()) throw amber::ConfigError("field 'methods' is required");
    for (const auto& name : cfg.methods) methods.push_back(amber::method_from_string(name));
    return methods;
}

int cmd_compare(const RunConfig& cfg) {
    amber::Dataset full = load_dataset(cfg.dataset);
    auto methods = parse_methods(cfg);
    auto seeds = run_seeds(cfg);
    amber::BenchReport report =
        amber::compare_table(methods, full, cfg.runs, seeds, cfg.proto, cfg.timing);
    ensure_out(cfg);
    write_manifest(cfg, "compare");

    std::string grid = "method,feature_count,run,accuracy\n";
    for (const auto& [method, bench] : report.rows)
        for (std::size_t r = 0; r < bench.per_run_accuracies.size(); ++r) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f\n", amber::to_string(method).c_str(),
                          report.k_keep, r, bench.per_run_accuracies[r]);
            grid += buf;
        }
    amber::write_text_file(cfg.out + "/compare.csv", grid);

    std::string table = "method,mean_accuracy,ranking_seconds\n";
    json summary;
    summary["k_keep"] = report.k_keep;
    summary["runs"] = report.runs;
    summary["seeds"] = report.seeds;
    for (const auto& [method, bench] : report.rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", amber::to_string(method).c_str(),
                      bench.mean_accuracy, bench.ranking_seconds);
        table += buf;
        summary["rows"].push_back({{"method", amber::to_string(method)},
                                   {"mean_accuracy", bench.mean_accuracy},
                                   {"per_run", bench.per_run_accuracies},
                                   {"ranking_seconds", bench.ranking_seconds},
                                   {"ranking_seconds_variance", bench.ranking_seconds_variance}});
    }
    amber::write_text_file(cfg.out + "/compare_summary.csv", table);
    amber::write_text_file(cfg.out + "/summary.json", summary.dump(2) + "\n");

    std::printf("top %zu features, %zu run(s)\n", report.k_keep, report.runs);
    std::printf("%-22s %10s %14s\n", "method", "accuracy", "rank-seconds");
    for (const auto& [method, bench] : report.rows)
        std::printf("%-22s %10.4f %14.4f\n", amber::to_string(method).c_str(), bench.mean_accuracy,
                    bench.ranking_seconds);
    return 0;
}

int cmd_bench_time(const RunConfig& cfg) {
    amber::Dataset full = load_dataset(cfg.dataset);
    auto methods = parse_methods(cfg);
    auto seeds = run_seeds(cfg);
    auto [train_set, test_set] = amber::split(full, cfg.proto.test_fraction, seeds[0]);
    amber::NormStats stats = amber::normalize_fit(train_set.X);
    train_set.X = amber::normalize_apply(train_set.X, stats);

    ensure_out(cfg);
    write_manifest(cfg, "bench-time");
    std::string csv = "method,seconds\n";
    json summary;
    std::printf("%-22s %12s %12s\n", "method", "seconds", "variance");
    for (amber::Method m : methods) {
        amber::TimingResult t =
            amber::time_ranking(m, train_set, cfg.proto, cfg.proto.timing_repeats, seeds[0]);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s,%.6f\n", amber::to_string(m).c_str(), t.mean_seconds);
        csv += buf;
        summary["rows"].push_back({{"method", amber::to_string(m)},
                                   {"mean_seconds", t.mean_seconds},
                                   {"variance", t.variance},
                                   {"samples", t.samples}});
        std::printf("%-22s %12.4f %12.6f\n", amber::to_string(m).c_str(), t.mean_seconds,
                    t.variance);
    }
    amber::write_text_file(cfg.out + "/timing.csv", csv);
    amber::write_text_file(cfg.out + "/summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_gen_synthetic(const RunConfig& cfg) {
    amber::Dataset ds = load_dataset(cfg.dataset);
    ensure_out(cfg);
    write_manifest(cfg, "gen-synthetic");
    std::string csv;
    for (std::size_t j = 0; j < ds.d(); ++j) csv += ds.feature_names[j] + ",";
    csv += "label\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        char buf[32];
        for (std::size_t j = 0; j < ds.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,", ds.X(i, j));
            csv += buf;
        }
        csv += std::to_string(ds.y[i]) + "\n";
    }
    amber::write_text_file(cfg.out + "/dataset.csv", csv);
    std::printf("wrote %s/dataset.csv (%zu rows, %zu features)\n", cfg.out.c_str(), ds.n(), ds.d());
    if (!ds.groups.empty())
        std::printf("grouped dataset: use dataset.groups=\"paired-halves\" when loading\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AMBER feature selection toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> k_override;
    std::optional<std::string> out_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed_override, "override config seed");
        sub->add_option("--k", k_override, "override config k");
        sub->add_option("--out", out_override, "override output directory");
    };
    CLI::App* select = app.add_subcommand("select", "eliminate or rank features");
    CLI::App* curve = app.add_subcommand("curve", "accuracy vs feature count");
    CLI::App* compare = app.add_subcommand("compare", "top-10% accuracy comparison");
    CLI::App* bench = app.add_subcommand("bench-time", "ranking wall-time benchmark");
    CLI::App* gen = app.add_subcommand("gen-synthetic", "write a synthetic dataset csv");
    for (CLI::App* sub : {select, curve, compare, bench, gen}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = parse_config(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.raw["seed"] = *seed_override;
        }
        if (k_override) {
            cfg.k = *k_override;
            cfg.raw["k"] = *k_override;
        }
        if (out_override) {
            cfg.out = *out_override;
            cfg.raw["out"] = *out_override;
        }
        if (select->parsed()) return cmd_select(cfg);
        if (curve->parsed()) return cmd_curve(cfg);
        if (compare->parsed()) return cmd_compare(cfg);
        if (bench->parsed()) return cmd_bench_time(cfg);
        if (gen->parsed()) return cmd_gen_synthetic(cfg);
    } catch (const amber::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const amber::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const amber::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    }
    return 0;
}
