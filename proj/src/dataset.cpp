#include "amber/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "amber/errors.hpp"
#include "amber/rng.hpp"

namespace amber {

namespace {

// One CSV record, RFC-4180 quoting. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtol(s.c_str(), &end, 10);
    return end == s.c_str() + s.size();
}

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

}  // namespace

void Dataset::validate() const {
    if (n() < 1 || d() < 1) throw DataError("dataset: needs at least one row and one feature");
    if (y.size() != n()) throw DataError("dataset: label count != row count");
    if (num_classes < 1) throw DataError("dataset: num_classes must be >= 1");
    for (int label : y)
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
            throw DataError("dataset: label " + std::to_string(label) + " out of range");
    std::vector<std::uint8_t> seen(d(), 0);
    for (const auto& g : groups) {
        for (std::size_t f : g) {
            if (f >= d()) throw DataError("dataset: group member " + std::to_string(f) +
                                          " out of range");
            if (seen[f]) throw DataError("dataset: feature " + std::to_string(f) +
                                         " appears in more than one group");
            seen[f] = 1;
        }
    }
}

std::size_t FeatureMask::count_active() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t(1)));
}

std::vector<std::size_t> FeatureMask::active_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < active.size(); ++i)
        if (active[i]) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> FeatureMask::inactive_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < active.size(); ++i)
        if (!active[i]) idx.push_back(i);
    return idx;
}

Dataset load_csv(const std::string& path, const LabelColumn& label_column, bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv: cannot open " + path);

    std::vector<std::string> fields;
    std::vector<std::string> header;
    if (has_header) {
        if (!read_record(in, header)) throw DataError("csv: empty file " + path);
    }

    std::size_t label_idx;
    if (std::holds_alternative<std::size_t>(label_column)) {
        label_idx = std::get<std::size_t>(label_column);
    } else {
        const std::string& name = std::get<std::string>(label_column);
        if (!has_header) throw ConfigError("csv: label column by name requires a header");
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("csv: label column '" + name + "' not in header");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t width = has_header ? header.size() : 0;
    std::size_t line_no = has_header ? 1 : 0;
    while (read_record(in, fields)) {
        ++line_no;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw DataError("csv: ragged row " + std::to_string(line_no) + " in " + path + " (" +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(width) + ")");
        if (label_idx >= width)
            throw ConfigError("csv: label column index " + std::to_string(label_idx) +
                              " out of range for " + std::to_string(width) + " columns");
        std::vector<double> row;
        row.reserve(width - 1);
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_idx) {
                raw_labels.push_back(fields[c]);
                continue;
            }
            double x;
            if (!parse_double(fields[c], x))
                throw DataError("csv: cannot parse '" + fields[c] + "' at row " +
                                std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                " of " + path);
            row.push_back(x);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("csv: no data rows in " + path);

    Dataset ds;
    ds.X = Matrix(rows.size(), width - 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), ds.X.row(i));

    // integer labels are class ids; anything else maps by first appearance
    bool all_ints = true;
    std::vector<long> int_labels(raw_labels.size());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        if (!parse_int(raw_labels[i], int_labels[i]) || int_labels[i] < 0) {
            all_ints = false;
            break;
        }
    }
    ds.y.resize(raw_labels.size());
    if (all_ints) {
        long mx = 0;
        for (std::size_t i = 0; i < int_labels.size(); ++i) {
            ds.y[i] = static_cast<int>(int_labels[i]);
            mx = std::max(mx, int_labels[i]);
        }
        ds.num_classes = static_cast<std::size_t>(mx) + 1;
    } else {
        std::map<std::string, int> ids;
        std::vector<std::string> order;
        for (std::size_t i = 0; i < raw_labels.size(); ++i) {
            auto it = ids.find(raw_labels[i]);
            if (it == ids.end()) {
                it = ids.emplace(raw_labels[i], static_cast<int>(order.size())).first;
                order.push_back(raw_labels[i]);
            }
            ds.y[i] = it->second;
        }
        ds.num_classes = order.size();
    }

    for (std::size_t c = 0; c < width; ++c) {
        if (c == label_idx) continue;
        if (has_header)
            ds.feature_names.push_back(header[c]);
        else
            ds.feature_names.push_back("f" + std::to_string(ds.feature_names.size()));
    }
    ds.validate();
    return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataError("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("idx: cannot open " + labels_path);

    std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != 0x00000803)
        throw DataError("idx: bad image magic in " + images_path + " (got 0x" +
                        [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", img_magic); return std::string(b); }() +
                        ", want 0x00000803)");
    std::uint32_t count = read_be32(img, images_path);
    std::uint32_t rows = read_be32(img, images_path);
    std::uint32_t cols = read_be32(img, images_path);

    std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != 0x00000801)
        throw DataError("idx: bad label magic in " + labels_path);
    std::uint32_t lab_count = read_be32(lab, labels_path);
    if (lab_count != count)
        throw DataError("idx: image count " + std::to_string(count) + " != label count " +
                        std::to_string(lab_count));
    if (count == 0 || rows == 0 || cols == 0) throw DataError("idx: empty dimensions");

    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    Dataset ds;
    ds.X = Matrix(count, d);
    std::vector<unsigned char> buf(d);
    for (std::size_t i = 0; i < count; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d)))
            throw DataError("idx: truncated image data in " + images_path);
        double* row = ds.X.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = static_cast<double>(buf[j]) / 255.0;
    }
    ds.y.resize(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        int ch = lab.get();
        if (ch == EOF) throw DataError("idx: truncated label data in " + labels_path);
        ds.y[i] = ch;
        max_label = std::max(max_label, ch);
    }
    ds.num_classes = static_cast<std::size_t>(max_label) + 1;
    ds.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("px" + std::to_string(j));
    ds.validate();
    return ds;
}

NormStats normalize_fit(const Matrix& x) {
    if (x.rows == 0) throw DataError("normalize_fit: empty matrix");
    NormStats s;
    s.means.assign(x.cols, 0.0);
    s.stds.assign(x.cols, 0.0);
    const double n = static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) s.means[j] += r[j];
    }
    for (std::size_t j = 0; j < x.cols; ++j) s.means[j] /= n;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            double d = r[j] - s.means[j];
            s.stds[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
        s.stds[j] = std::sqrt(s.stds[j] / n);  // population std
        if (s.stds[j] == 0.0) s.stds[j] = 1.0;
    }
    return s;
}

Matrix normalize_apply(const Matrix& x, const NormStats& stats) {
    if (x.cols != stats.means.size())
        throw ShapeError("normalize_apply: width " + std::to_string(x.cols) +
                         " != stats width " + std::to_string(stats.means.size()));
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) r[j] = (r[j] - stats.means[j]) / stats.stds[j];
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split: test_fraction must be in (0,1)");
    ds.validate();

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.n(); ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < 2)
            throw DataError("split: class " + std::to_string(c) +
                            " has fewer than 2 examples; cannot appear on both sides");
        Rng rng(mix_seed(seed, 0x5b1174c0 + c));
        rng.shuffle(idx);
        std::size_t want = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        want = std::clamp<std::size_t>(want, 1, idx.size() - 1);
        test_rows.insert(test_rows.end(), idx.begin(), idx.begin() + want);
        train_rows.insert(train_rows.end(), idx.begin() + want, idx.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    auto take = [&](const std::vector<std::size_t>& rows) {
        Dataset out;
        out.X = Matrix(rows.size(), ds.d());
        out.y.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::copy(ds.X.row(rows[i]), ds.X.row(rows[i]) + ds.d(), out.X.row(i));
            out.y.push_back(ds.y[rows[i]]);
        }
        out.feature_names = ds.feature_names;
        out.groups = ds.groups;
        out.num_classes = ds.num_classes;
        return out;
    };
    return {take(train_rows), take(test_rows)};
}

Matrix mask_zero(const Matrix& x, const FeatureMask& mask, const std::vector<std::size_t>& also_zero) {
    if (mask.size() != x.cols) throw ShapeError("mask_zero: mask width mismatch");
    std::vector<std::uint8_t> zero(x.cols, 0);
    for (std::size_t j = 0; j < x.cols; ++j)
        if (!mask.active[j]) zero[j] = 1;
    for (std::size_t j : also_zero) {
        if (j >= x.cols) throw ShapeError("mask_zero: index " + std::to_string(j) + " out of range");
        zero[j] = 1;
    }
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j)
            if (zero[j]) r[j] = 0.0;
    }
    return out;
}

Matrix mask_remove(const Matrix& x, const FeatureMask& mask) {
    if (mask.size() != x.cols) throw ShapeError("mask_remove: mask width mismatch");
    std::vector<std::size_t> keep = mask.active_indices();
    if (keep.empty()) throw DataError("mask_remove: no active features left");
    Matrix out(x.rows, keep.size());
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < keep.size(); ++j) dst[j] = src[keep[j]];
    }
    return out;
}

std::vector<std::size_t> expand_groups(const std::vector<std::vector<std::size_t>>& groups,
                                       std::size_t feature) {
    for (const auto& g : groups) {
        if (std::find(g.begin(), g.end(), feature) != g.end()) {
            std::vector<std::size_t> out = g;
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    return {feature};
}

std::vector<std::vector<std::size_t>> elimination_units(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> units;
    std::vector<std::uint8_t> covered(ds.d(), 0);
    for (std::size_t f = 0; f < ds.d(); ++f) {
        if (covered[f]) continue;
        std::vector<std::size_t> unit = expand_groups(ds.groups, f);
        for (std::size_t m : unit) covered[m] = 1;
        units.push_back(std::move(unit));
    }
    return units;
}

}  // namespace amber
