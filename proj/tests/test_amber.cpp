#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "amber/amber.hpp"
#include "amber/errors.hpp"
#include "amber/rng.hpp"
#include "amber/synthetic.hpp"
#include "amber/trace_io.hpp"

using namespace amber;

namespace {

Dataset normalized(Dataset ds) {
    NormStats stats = normalize_fit(ds.X);
    ds.X = normalize_apply(ds.X, stats);
    return ds;
}

AmberConfig quick_config(std::size_t k, std::uint64_t seed) {
    AmberConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.rm_train.loss = Loss::BinaryCrossEntropy;
    cfg.rm_train.learning_rate = 0.1;
    cfg.rm_train.max_epochs = 60;
    cfg.rm_train.patience = 5;
    cfg.rm_train.validation_fraction = 0.1;
    cfg.ae_train.loss = Loss::Mse;
    cfg.ae_train.learning_rate = 0.05;
    cfg.ae_train.max_epochs = 40;
    cfg.ae_train.patience = 0;
    cfg.ae_train.validation_fraction = 0.0;
    return cfg;
}

std::vector<LayerSpec> small_rm(std::size_t d) {
    return {{d, 6, Activation::Relu}, {6, 1, Activation::Sigmoid}};
}

}  // namespace

TEST_CASE("train_ranker: overfit mode runs the full epoch budget") {
    Dataset ds = normalized(gen_single_informative(80, 4, 1));
    AmberConfig cfg = quick_config(1, 5);
    cfg.overfit_mode = true;
    cfg.rm_train.max_epochs = 100;
    TrainReport report;
    train_ranker(ds, small_rm(4), cfg, &report);
    CHECK(report.epochs_run == 100);
}

TEST_CASE("train_ranker: identical configs give identical parameters") {
    Dataset ds = normalized(gen_single_informative(60, 4, 2));
    AmberConfig cfg = quick_config(1, 9);
    NetworkParams a = train_ranker(ds, small_rm(4), cfg);
    NetworkParams b = train_ranker(ds, small_rm(4), cfg);
    CHECK(a == b);
}

TEST_CASE("train_ranker rejects a spec that does not match the dataset width") {
    Dataset ds = normalized(gen_single_informative(30, 4, 3));
    AmberConfig cfg = quick_config(1, 1);
    CHECK_THROWS_AS(train_ranker(ds, small_rm(5), cfg), ConfigError);
}

TEST_CASE("relevance_scores: zero-weight candidate equals the baseline loss") {
    Dataset ds = normalized(gen_single_informative(50, 3, 4));
    NetworkParams rm = init_network(small_rm(3), 8);
    for (std::size_t h = 0; h < rm.weights[0].rows; ++h) rm.weights[0](h, 2) = 0.0;

    FeatureMask none(3);
    double baseline = loss_value(forward(rm, ds.X), ds.y, Loss::BinaryCrossEntropy);
    auto scores = relevance_scores(rm, ds.X, ds.y, Loss::BinaryCrossEntropy, none, {{2}, {0}});
    CHECK(scores[0] == doctest::Approx(baseline).epsilon(1e-12));
    CHECK(scores[1] != doctest::Approx(baseline).epsilon(1e-9));

    auto again = relevance_scores(rm, ds.X, ds.y, Loss::BinaryCrossEntropy, none, {{2}, {0}});
    CHECK(scores == again);
}

TEST_CASE("relevance_scores: informative feature scores above a noise feature") {
    Dataset ds = normalized(gen_single_informative(300, 2, 6));
    AmberConfig cfg = quick_config(1, 12);
    cfg.rm_train.max_epochs = 200;
    cfg.rm_train.patience = 0;
    cfg.rm_train.validation_fraction = 0.0;
    NetworkParams rm = train_ranker(ds, small_rm(2), cfg);
    FeatureMask none(2);
    auto scores = relevance_scores(rm, ds.X, ds.y, Loss::BinaryCrossEntropy, none, {{0}, {1}});
    CHECK(scores[0] > scores[1]);
}

TEST_CASE("relevance_scores rejects candidates that overlap the eliminated set") {
    Dataset ds = normalized(gen_single_informative(20, 3, 7));
    NetworkParams rm = init_network(small_rm(3), 1);
    FeatureMask mask(3);
    mask.active[1] = 0;
    CHECK_THROWS_AS(
        relevance_scores(rm, ds.X, ds.y, Loss::BinaryCrossEntropy, mask, {{1}}),
        std::logic_error);
}

TEST_CASE("train_autoencoder: undercomplete by exactly one unit") {
    Matrix data(10, 2);
    Rng rng(3);
    for (double& v : data.v) v = rng.uniform(-1, 1);
    AmberConfig cfg = quick_config(1, 2);
    cfg.ae_train.max_epochs = 1;
    NetworkParams ae = train_autoencoder(data, cfg, 1);
    REQUIRE(ae.specs.size() == 2);
    CHECK(ae.specs[0].input_width == 2);
    CHECK(ae.specs[0].output_width == 1);
    CHECK(ae.specs[1].output_width == 2);

    Matrix one(10, 1);
    CHECK_THROWS_AS(train_autoencoder(one, cfg, 1), ConfigError);
}

TEST_CASE("train_autoencoder: training beats an untrained autoencoder on duplicated columns") {
    Rng rng(19);
    Matrix data(200, 3);
    for (std::size_t i = 0; i < 200; ++i) {
        double a = rng.normal();
        data(i, 0) = a;
        data(i, 1) = rng.normal();
        data(i, 2) = a;  // duplicate of column 0
    }
    NormStats stats = normalize_fit(data);
    data = normalize_apply(data, stats);

    AmberConfig cfg = quick_config(1, 21);
    cfg.ae_train.max_epochs = 80;
    NetworkParams trained = train_autoencoder(data, cfg, 1);
    NetworkParams untrained = init_network(trained.specs, 99);
    double mse_trained = loss_value(forward(trained, data), data, Loss::Mse);
    double mse_untrained = loss_value(forward(untrained, data), data, Loss::Mse);
    CHECK(mse_trained < mse_untrained);
}

TEST_CASE("redundancy_scores: contrived identity autoencoder scores a dead column at zero") {
    // column 2 is identically zero; weights reproduce (x0, x1, 0) exactly
    Matrix data(6, 3);
    Rng rng(4);
    for (std::size_t i = 0; i < 6; ++i) {
        data(i, 0) = rng.uniform(0.1, 1.0);  // positive, so relu is identity
        data(i, 1) = rng.uniform(0.1, 1.0);
        data(i, 2) = 0.0;
    }
    NetworkParams ae = init_network(
        {{3, 2, Activation::Relu}, {2, 3, Activation::Linear}}, 0);
    ae.weights[0] = Matrix(2, 3);
    ae.weights[0](0, 0) = 1.0;
    ae.weights[0](1, 1) = 1.0;
    ae.biases[0] = {0, 0};
    ae.weights[1] = Matrix(3, 2);
    ae.weights[1](0, 0) = 1.0;
    ae.weights[1](1, 1) = 1.0;
    ae.biases[1] = {0, 0, 0};

    auto scores = redundancy_scores(ae, data, {{2}, {0}});
    CHECK(scores[0] == 0.0);
    CHECK(scores[1] > 0.0);

    // evaluation order cannot matter
    auto flipped = redundancy_scores(ae, data, {{0}, {2}});
    CHECK(flipped[1] == scores[0]);
    CHECK(flipped[0] == scores[1]);

    CHECK_THROWS_AS(redundancy_scores(ae, data, {{9}}), ShapeError);
}

TEST_CASE("redundancy_scores: duplicated column reads as more redundant than noise") {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        Matrix data(300, 3);
        for (std::size_t i = 0; i < 300; ++i) {
            double a = rng.normal();
            data(i, 0) = a;
            data(i, 1) = rng.normal();
            data(i, 2) = a;
        }
        NormStats stats = normalize_fit(data);
        data = normalize_apply(data, stats);
        AmberConfig cfg = quick_config(1, seed * 101);
        cfg.ae_train.max_epochs = 80;
        NetworkParams ae = train_autoencoder(data, cfg, 1);
        auto scores = redundancy_scores(ae, data, {{1}, {2}});
        if (scores[1] < scores[0]) ++hits;
    }
    CHECK(hits >= 4);
}

TEST_CASE("combine_saliency: hand arithmetic and degenerate ranges") {
    std::vector<double> rel = {0, 1, 2};
    std::vector<double> red = {10, 20, 30};
    auto sal = combine_saliency(rel, &red);
    CHECK(sal[0] == doctest::Approx(0.5));
    CHECK(sal[1] == doctest::Approx(1.5));
    CHECK(sal[2] == doctest::Approx(2.5));

    std::vector<double> flat = {7, 7, 7};
    auto sal2 = combine_saliency(rel, &flat);
    auto rel_only = combine_saliency(rel, nullptr);
    CHECK(sal2 == rel_only);
    CHECK(rel_only[2] == doctest::Approx(1.0));
}

TEST_CASE("combine_saliency: argmin is invariant to positive rescaling") {
    Rng rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> rel, red;
        for (int i = 0; i < 6; ++i) {
            rel.push_back(rng.uniform(0, 5));
            red.push_back(rng.uniform(0, 5));
        }
        auto base = combine_saliency(rel, &red);
        std::size_t argmin_base = std::min_element(base.begin(), base.end()) - base.begin();

        double c1 = rng.uniform(0.01, 100.0), c2 = rng.uniform(0.01, 100.0);
        std::vector<double> rel2 = rel, red2 = red;
        for (double& v : rel2) v *= c1;
        for (double& v : red2) v *= c2;
        auto scaled = combine_saliency(rel2, &red2);
        std::size_t argmin_scaled = std::min_element(scaled.begin(), scaled.end()) - scaled.begin();
        CHECK(argmin_base == argmin_scaled);
    }
}

TEST_CASE("eliminate_one: argmin with lowest-id tie rule") {
    SaliencyScores s;
    s.candidates = {4, 7, 9};
    s.saliency = {0.5, 0.2, 0.9};
    CHECK(eliminate_one(s) == 7);

    s.candidates = {3, 8};
    s.saliency = {0.3, 0.3};
    CHECK(eliminate_one(s) == 3);

    s.candidates = {11};
    s.saliency = {1.0};
    CHECK(eliminate_one(s) == 11);
}

TEST_CASE("run_amber: k=1 trace shape and mask consistency") {
    Dataset ds = normalized(gen_single_informative(60, 4, 8));
    AmberConfig cfg = quick_config(1, 31);
    EliminationTrace trace = run_amber(ds, small_rm(4), cfg);
    REQUIRE(trace.iterations.size() == 1);
    CHECK(trace.iterations[0].eliminated.size() == 1);
    CHECK(trace.final_mask.count_active() == 3);
    CHECK(trace.final_mask.active[trace.iterations[0].eliminated[0]] == 0);
}

TEST_CASE("run_amber rejects out-of-range k") {
    Dataset ds = normalized(gen_single_informative(30, 4, 9));
    AmberConfig cfg = quick_config(4, 1);
    CHECK_THROWS_AS(run_amber(ds, small_rm(4), cfg), ConfigError);
    cfg.k = 0;
    CHECK_THROWS_AS(run_amber(ds, small_rm(4), cfg), ConfigError);
}

TEST_CASE("run_amber: duplicate-feature synthetic keeps the informative signal") {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Dataset ds = normalized(gen_duplicate_feature(500, seed));
        AmberConfig cfg = quick_config(2, seed * 7 + 1);
        cfg.rm_train.max_epochs = 120;
        EliminationTrace trace = run_amber(ds, small_rm(4), cfg);
        std::set<std::size_t> elim;
        for (const auto& it : trace.iterations)
            elim.insert(it.eliminated.begin(), it.eliminated.end());
        REQUIRE(elim.size() == 2);
        bool info_survives = !(elim.count(0) && elim.count(3));
        if (info_survives) ++ok;
    }
    CHECK(ok >= 4);
}

TEST_CASE("run_amber: structural invariants along a longer run") {
    Dataset ds = normalized(gen_single_informative(80, 6, 10));
    AmberConfig cfg = quick_config(4, 77);
    EliminationTrace trace = run_amber(ds, small_rm(6), cfg);
    REQUIRE(trace.iterations.size() == 4);

    std::set<std::size_t> seen;
    std::size_t active = 6;
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& rec = trace.iterations[i];
        for (std::size_t f : rec.eliminated) {
            CHECK(seen.count(f) == 0);  // no unit eliminated twice
            seen.insert(f);
        }
        // one candidate per remaining unit; scores aligned with candidates
        CHECK(rec.scores.candidates.size() == active);
        CHECK(rec.scores.relevance.size() == active);
        CHECK(rec.scores.redundancy.size() == active);
        CHECK(rec.scores.saliency.size() == active);
        for (double v : rec.scores.relevance) CHECK(v >= 0.0);
        for (double v : rec.scores.redundancy) CHECK(v >= 0.0);
        active -= rec.eliminated.size();
        CHECK(trace.mask_after(i + 1).count_active() == active);
    }
    // final mask inactive set equals the union of eliminated groups
    for (std::size_t f = 0; f < 6; ++f)
        CHECK(trace.final_mask.active[f] == (seen.count(f) ? 0 : 1));
}

TEST_CASE("run_amber: identical configs give identical traces") {
    Dataset ds = normalized(gen_duplicate_feature(150, 3));
    AmberConfig cfg = quick_config(2, 55);
    EliminationTrace a = run_amber(ds, small_rm(4), cfg);
    EliminationTrace b = run_amber(ds, small_rm(4), cfg);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].unit == b.iterations[i].unit);
        CHECK(a.iterations[i].scores.relevance == b.iterations[i].scores.relevance);
        CHECK(a.iterations[i].scores.redundancy == b.iterations[i].scores.redundancy);
        CHECK(a.iterations[i].scores.saliency == b.iterations[i].scores.saliency);
    }
}

TEST_CASE("run_amber: relevance-only elimination is reproducible") {
    Dataset ds = normalized(gen_single_informative(100, 5, 12));
    AmberConfig cfg = quick_config(3, 91);
    cfg.use_redundancy = false;
    EliminationTrace a = run_amber(ds, small_rm(5), cfg);
    EliminationTrace b = run_amber(ds, small_rm(5), cfg);
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].unit == b.iterations[i].unit);
        CHECK(a.iterations[i].scores.redundancy.empty());
    }
}

TEST_CASE("run_amber: grouped pairs are eliminated atomically") {
    Dataset ds = normalized(gen_paired_groups(120, 4, 14));  // 8 features, 4 pairs
    AmberConfig cfg = quick_config(2, 33);
    EliminationTrace trace = run_amber(ds, small_rm(8), cfg);
    REQUIRE(trace.iterations.size() == 2);
    for (const auto& rec : trace.iterations) {
        CHECK(rec.eliminated.size() == 2);
        CHECK(rec.eliminated[0] + 4 == rec.eliminated[1]);
    }
    CHECK(trace.final_mask.count_active() == 4);
}

TEST_CASE("forced dead feature is eliminated first when redundancy is off") {
    Dataset ds = normalized(gen_single_informative(200, 4, 15));
    AmberConfig cfg = quick_config(1, 44);
    cfg.rm_train.max_epochs = 150;
    NetworkParams rm = train_ranker(ds, small_rm(4), cfg);
    for (std::size_t h = 0; h < rm.weights[0].rows; ++h) rm.weights[0](h, 2) = 0.0;

    FeatureMask none(4);
    auto rel = relevance_scores(rm, ds.X, ds.y, Loss::BinaryCrossEntropy, none,
                                {{0}, {1}, {2}, {3}});
    double baseline = loss_value(forward(rm, mask_zero(ds.X, none)), ds.y,
                                 Loss::BinaryCrossEntropy);
    CHECK(rel[2] == doctest::Approx(baseline).epsilon(1e-12));
    bool others_above = rel[0] > baseline && rel[1] > baseline && rel[3] > baseline;
    if (others_above) {
        SaliencyScores s;
        s.candidates = {0, 1, 2, 3};
        s.relevance = rel;
        s.saliency = combine_saliency(rel, nullptr);
        CHECK(eliminate_one(s) == 2);
    }
}

TEST_CASE("elimination trace round-trips through its json document") {
    Dataset ds = normalized(gen_duplicate_feature(80, 5));
    AmberConfig cfg = quick_config(2, 66);
    EliminationTrace trace = run_amber(ds, small_rm(4), cfg);
    std::string doc = trace_to_json(trace);
    EliminationTrace back = trace_from_json(doc);
    REQUIRE(back.iterations.size() == trace.iterations.size());
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        CHECK(back.iterations[i].unit == trace.iterations[i].unit);
        CHECK(back.iterations[i].eliminated == trace.iterations[i].eliminated);
        CHECK(back.iterations[i].scores.relevance == trace.iterations[i].scores.relevance);
        CHECK(back.iterations[i].scores.saliency == trace.iterations[i].scores.saliency);
    }
    CHECK(back.final_mask.active == trace.final_mask.active);
    // parsing a ranking document as a trace must fail loudly
    CHECK_THROWS_AS(trace_from_json(ranking_to_json(FeatureRanking{})), DataError);
}
