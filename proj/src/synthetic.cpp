#include "amber/synthetic.hpp"

#include "amber/rng.hpp"

namespace amber {

namespace {

void finish(Dataset& ds) {
    ds.num_classes = 2;
    for (std::size_t j = 0; j < ds.d(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.validate();
}

}  // namespace

Dataset gen_duplicate_feature(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, 4);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x0 = rng.normal();
        ds.X(i, 0) = x0;
        ds.X(i, 1) = rng.normal();
        ds.X(i, 2) = rng.normal();
        ds.X(i, 3) = x0;
        ds.y[i] = x0 > 0.0 ? 1 : 0;
    }
    finish(ds);
    return ds;
}

Dataset gen_single_informative(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, d);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.X(i, j) = rng.normal();
        ds.y[i] = ds.X(i, 0) > 0.0 ? 1 : 0;
    }
    finish(ds);
    return ds;
}

Dataset gen_paired_groups(std::size_t n, std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, 2 * samples);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 2 * samples; ++j) ds.X(i, j) = rng.normal();
        ds.y[i] = ds.X(i, 0) + ds.X(i, samples) > 0.0 ? 1 : 0;
    }
    for (std::size_t j = 0; j < samples; ++j) ds.groups.push_back({j, j + samples});
    finish(ds);
    return ds;
}

}  // namespace amber
