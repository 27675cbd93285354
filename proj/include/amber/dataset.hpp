#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "amber/matrix.hpp"

namespace amber {

// Feature matrix plus labels. groups, when non-empty, partitions a subset of
// the feature indices into units that must be eliminated atomically.
struct Dataset {
    Matrix X;
    std::vector<int> y;
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::size_t>> groups;
    std::size_t num_classes = 0;

    std::size_t n() const { return X.rows; }
    std::size_t d() const { return X.cols; }
    void validate() const;
};

struct NormStats {
    std::vector<double> means;
    std::vector<double> stds;  // recorded as 1 where the raw std is 0
};

struct FeatureMask {
    std::vector<std::uint8_t> active;  // 1 = retained

    explicit FeatureMask(std::size_t d = 0) : active(d, 1) {}
    std::size_t size() const { return active.size(); }
    std::size_t count_active() const;
    std::vector<std::size_t> active_indices() const;
    std::vector<std::size_t> inactive_indices() const;
};

using LabelColumn = std::variant<std::size_t, std::string>;

Dataset load_csv(const std::string& path, const LabelColumn& label_column, bool has_header);
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

NormStats normalize_fit(const Matrix& x);
Matrix normalize_apply(const Matrix& x, const NormStats& stats);

// Stratified shuffle-split; per-class test counts are rounded to nearest.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Columns that are masked out (or listed in also_zero) are set to 0; the
// width is preserved.
Matrix mask_zero(const Matrix& x, const FeatureMask& mask,
                 const std::vector<std::size_t>& also_zero = {});

// Inactive columns are physically dropped, order preserved.
Matrix mask_remove(const Matrix& x, const FeatureMask& mask);

// The whole group containing `feature`, or the singleton {feature}.
std::vector<std::size_t> expand_groups(const std::vector<std::vector<std::size_t>>& groups,
                                       std::size_t feature);

// Atomic elimination units: each group is one unit, every ungrouped feature
// is a singleton unit; ordered by smallest member, so unit id == feature id
// for ungrouped datasets.
std::vector<std::vector<std::size_t>> elimination_units(const Dataset& ds);

}  // namespace amber
