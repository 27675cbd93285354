#include "amber/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "amber/errors.hpp"
#include "amber/threads.hpp"

namespace amber {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kRowNormFloor = 1e-8;

int check_discrete(const std::vector<int>& v) {
    int mx = 0;
    for (int x : v) {
        if (x < 0) throw DataError("discrete vector has negative entry");
        mx = std::max(mx, x);
    }
    return mx + 1;
}

Matrix one_hot(const std::vector<int>& y, std::size_t classes) {
    Matrix m(y.size(), classes);
    for (std::size_t i = 0; i < y.size(); ++i) m(i, static_cast<std::size_t>(y[i])) = 1.0;
    return m;
}

double l21_norm_rows(const Matrix& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * r[j];
        total += std::sqrt(s);
    }
    return total;
}

std::vector<double> row_norms(const Matrix& m) {
    std::vector<double> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * r[j];
        out[i] = std::sqrt(s);
    }
    return out;
}

}  // namespace

std::vector<std::size_t> order_by_score_desc(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

std::vector<int> DiscretizedMatrix::column(std::size_t c) const {
    std::vector<int> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, c);
    return out;
}

FeatureRanking fisher_scores(const Matrix& x, const std::vector<int>& y) {
    if (x.rows < 2) throw DataError("fisher: need at least 2 examples");
    if (y.size() != x.rows) throw ShapeError("fisher: label count mismatch");
    int classes = check_discrete(y);
    std::vector<std::size_t> class_count(classes, 0);
    for (int c : y) ++class_count[static_cast<std::size_t>(c)];
    if (std::count_if(class_count.begin(), class_count.end(), [](std::size_t n) { return n > 0; }) < 2)
        throw DataError("fisher: need at least 2 classes");

    const std::size_t d = x.cols;
    const double n = static_cast<double>(x.rows);
    std::vector<double> global_mean(d, 0.0);
    Matrix class_mean(classes, d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        double* cm = class_mean.row(static_cast<std::size_t>(y[i]));
        for (std::size_t j = 0; j < d; ++j) {
            global_mean[j] += r[j];
            cm[j] += r[j];
        }
    }
    for (std::size_t j = 0; j < d; ++j) global_mean[j] /= n;
    for (int c = 0; c < classes; ++c) {
        if (class_count[c] == 0) continue;
        double* cm = class_mean.row(c);
        for (std::size_t j = 0; j < d; ++j) cm[j] /= static_cast<double>(class_count[c]);
    }
    Matrix class_var(classes, d);  // population variance per class
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        const double* cm = class_mean.row(static_cast<std::size_t>(y[i]));
        double* cv = class_var.row(static_cast<std::size_t>(y[i]));
        for (std::size_t j = 0; j < d; ++j) {
            double diff = r[j] - cm[j];
            cv[j] += diff * diff;
        }
    }

    FeatureRanking rank;
    rank.method = "fisher";
    rank.scores.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double between = 0.0;
        double within = 0.0;
        for (int c = 0; c < classes; ++c) {
            if (class_count[c] == 0) continue;
            double nc = static_cast<double>(class_count[c]);
            double dm = class_mean(c, j) - global_mean[j];
            between += nc * dm * dm;
            within += class_var(c, j);  // already summed squared deviations = n_c * sigma^2
        }
        rank.scores[j] = between / std::max(within, kVarianceFloor);
    }
    rank.order = order_by_score_desc(rank.scores);
    return rank;
}

DiscretizedMatrix discretize(const Matrix& x, int bin_count) {
    if (bin_count < 2) throw ConfigError("discretize: bin_count must be >= 2");
    DiscretizedMatrix d;
    d.rows = x.rows;
    d.cols = x.cols;
    d.bin_count = bin_count;
    d.bins.assign(x.rows * x.cols, 0);
    std::vector<double> col(x.rows);
    for (std::size_t j = 0; j < x.cols; ++j) {
        for (std::size_t i = 0; i < x.rows; ++i) col[i] = x(i, j);
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        // quantile edges; a value lands in the bin of the last edge it exceeds
        std::vector<double> edges;
        for (int k = 1; k < bin_count; ++k) {
            std::size_t pos = static_cast<std::size_t>(
                std::ceil(static_cast<double>(k) * static_cast<double>(x.rows) /
                          static_cast<double>(bin_count)));
            pos = std::clamp<std::size_t>(pos, 1, x.rows) - 1;
            edges.push_back(sorted[pos]);
        }
        for (std::size_t i = 0; i < x.rows; ++i) {
            int b = 0;
            for (double e : edges)
                if (col[i] > e) ++b;
            d.bins[i * x.cols + j] = b;
        }
    }
    return d;
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ShapeError("mutual_information: length mismatch");
    if (a.empty()) throw DataError("mutual_information: empty vectors");
    int ka = check_discrete(a);
    int kb = check_discrete(b);
    std::vector<double> pa(ka, 0.0), pb(kb, 0.0), pab(static_cast<std::size_t>(ka) * kb, 0.0);
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        pab[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    }
    double mi = 0.0;
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) {
            double pj = pab[static_cast<std::size_t>(i) * kb + j];
            if (pj == 0.0) continue;
            mi += (pj / n) * std::log(pj * n / (pa[i] * pb[j]));
        }
    }
    return std::max(mi, 0.0);
}

double conditional_mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                                      const std::vector<int>& c) {
    if (a.size() != b.size() || a.size() != c.size())
        throw ShapeError("conditional_mutual_information: length mismatch");
    if (a.empty()) throw DataError("conditional_mutual_information: empty vectors");
    int ka = check_discrete(a);
    int kb = check_discrete(b);
    int kc = check_discrete(c);
    std::vector<double> pc(kc, 0.0);
    std::vector<double> pac(static_cast<std::size_t>(ka) * kc, 0.0);
    std::vector<double> pbc(static_cast<std::size_t>(kb) * kc, 0.0);
    std::vector<double> pabc(static_cast<std::size_t>(ka) * kb * kc, 0.0);
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pc[c[i]] += 1.0;
        pac[static_cast<std::size_t>(a[i]) * kc + c[i]] += 1.0;
        pbc[static_cast<std::size_t>(b[i]) * kc + c[i]] += 1.0;
        pabc[(static_cast<std::size_t>(a[i]) * kb + b[i]) * kc + c[i]] += 1.0;
    }
    double cmi = 0.0;
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) {
            for (int k = 0; k < kc; ++k) {
                double pj = pabc[(static_cast<std::size_t>(i) * kb + j) * kc + k];
                if (pj == 0.0) continue;
                cmi += (pj / n) * std::log(pc[k] * pj /
                                           (pac[static_cast<std::size_t>(i) * kc + k] *
                                            pbc[static_cast<std::size_t>(j) * kc + k]));
            }
        }
    }
    return std::max(cmi, 0.0);
}

FeatureRanking cmim_select(const DiscretizedMatrix& d, const std::vector<int>& y,
                           std::size_t k_select) {
    if (y.size() != d.rows) throw ShapeError("cmim: label count mismatch");
    if (k_select > d.cols) throw ConfigError("cmim: k_select exceeds feature count");
    const std::size_t nfeat = d.cols;

    std::vector<std::vector<int>> cols(nfeat);
    for (std::size_t j = 0; j < nfeat; ++j) cols[j] = d.column(j);

    // first pick by plain MI; afterwards the criterion is the running
    // min over selected s of I(f; y | s)
    std::vector<double> criterion(nfeat);
    for (std::size_t j = 0; j < nfeat; ++j) criterion[j] = mutual_information(cols[j], y);
    std::vector<std::uint8_t> selected(nfeat, 0);
    std::vector<std::size_t> picked;

    for (std::size_t step = 0; step < k_select; ++step) {
        std::size_t best = nfeat;
        for (std::size_t j = 0; j < nfeat; ++j) {
            if (selected[j]) continue;
            if (best == nfeat || criterion[j] > criterion[best]) best = j;
        }
        selected[best] = 1;
        picked.push_back(best);
        for (std::size_t j = 0; j < nfeat; ++j) {
            if (selected[j]) continue;
            double cmi = conditional_mutual_information(cols[j], y, cols[best]);
            criterion[j] = step == 0 ? cmi : std::min(criterion[j], cmi);
        }
    }

    FeatureRanking rank;
    rank.method = "cmim";
    rank.scores.assign(nfeat, 0.0);
    for (std::size_t p = 0; p < picked.size(); ++p)
        rank.scores[picked[p]] = static_cast<double>(nfeat - p);
    rank.order = picked;
    for (std::size_t j = 0; j < nfeat; ++j)
        if (!selected[j]) rank.order.push_back(j);
    return rank;
}

FeatureRanking rfs_scores(const Matrix& x, const std::vector<int>& y, double gamma,
                          const RfsOptions& opts) {
    if (gamma <= 0.0) throw ConfigError("rfs: gamma must be positive");
    if (y.size() != x.rows) throw ShapeError("rfs: label count mismatch");
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    int classes = check_discrete(y);
    Matrix yh = one_hot(y, static_cast<std::size_t>(classes));

    std::vector<double> res_w(n, 1.0);   // 1 / residual row norm
    std::vector<double> coef_w(d, 1.0);  // 1 / coefficient row norm
    Matrix w;
    double prev_obj = std::numeric_limits<double>::infinity();

    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        if (d <= n) {
            // (X^T D1 X + gamma D2) W = X^T D1 Y
            Matrix xw(n, d);
            for (std::size_t i = 0; i < n; ++i) {
                const double* xr = x.row(i);
                double* t = xw.row(i);
                for (std::size_t j = 0; j < d; ++j) t[j] = xr[j] * res_w[i];
            }
            Matrix a = matmul_tn(x, xw);
            for (std::size_t j = 0; j < d; ++j) a(j, j) += gamma * coef_w[j];
            Matrix rhs = matmul_tn(xw, yh);
            try {
                w = solve_spd(a, rhs);
            } catch (const NumericError& e) {
                throw NumericError("rfs: " + std::string(e.what()) + " at iteration " +
                                   std::to_string(it));
            }
        } else {
            // dual: (X D2^-1 X^T + gamma D1^-1) Z = Y, W = D2^-1 X^T Z
            Matrix xs(n, d);
            for (std::size_t i = 0; i < n; ++i) {
                const double* xr = x.row(i);
                double* t = xs.row(i);
                for (std::size_t j = 0; j < d; ++j) t[j] = xr[j] / coef_w[j];
            }
            Matrix a = matmul_nt(xs, x);
            for (std::size_t i = 0; i < n; ++i) a(i, i) += gamma / res_w[i];
            Matrix z;
            try {
                z = solve_spd(a, yh);
            } catch (const NumericError& e) {
                throw NumericError("rfs: " + std::string(e.what()) + " at iteration " +
                                   std::to_string(it));
            }
            w = matmul_tn(xs, z);
        }

        Matrix residual = matmul(x, w);
        for (std::size_t i = 0; i < n; ++i) {
            double* r = residual.row(i);
            const double* t = yh.row(i);
            for (std::size_t j = 0; j < residual.cols; ++j) r[j] -= t[j];
        }
        double obj = l21_norm_rows(residual) + gamma * l21_norm_rows(w);
        if (obj > prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)))
            throw NumericError("rfs: objective increased at iteration " + std::to_string(it));
        bool converged = prev_obj - obj < opts.tolerance;
        prev_obj = obj;
        if (converged) break;

        std::vector<double> rn = row_norms(residual);
        for (std::size_t i = 0; i < n; ++i) res_w[i] = 1.0 / std::max(rn[i], kRowNormFloor);
        std::vector<double> wn = row_norms(w);
        for (std::size_t j = 0; j < d; ++j) coef_w[j] = 1.0 / std::max(wn[j], kRowNormFloor);
    }

    FeatureRanking rank;
    rank.method = "rfs";
    rank.scores = row_norms(w);
    rank.order = order_by_score_desc(rank.scores);
    return rank;
}

SweepResult rfs_sweep(const Matrix& x_train, const std::vector<int>& y_train, const Matrix& x_val,
                      const std::vector<int>& y_val, const std::vector<double>& gammas,
                      std::size_t k_keep, const std::vector<LayerSpec>& final_spec,
                      const TrainConfig& final_train, const RfsOptions& opts) {
    if (gammas.empty()) throw ConfigError("rfs_sweep: empty gamma list");
    if (k_keep == 0 || k_keep > x_train.cols) throw ConfigError("rfs_sweep: bad k_keep");

    SweepResult best;
    bool have = false;
    for (double gamma : gammas) {
        FeatureRanking rank = rfs_scores(x_train, y_train, gamma, opts);
        std::vector<std::size_t> keep(rank.order.begin(), rank.order.begin() + k_keep);
        std::sort(keep.begin(), keep.end());
        Matrix xt(x_train.rows, k_keep), xv(x_val.rows, k_keep);
        for (std::size_t i = 0; i < x_train.rows; ++i)
            for (std::size_t j = 0; j < k_keep; ++j) xt(i, j) = x_train(i, keep[j]);
        for (std::size_t i = 0; i < x_val.rows; ++i)
            for (std::size_t j = 0; j < k_keep; ++j) xv(i, j) = x_val(i, keep[j]);
        NetworkParams net = init_network(final_spec, final_train.seed);
        auto [trained, report] = train(net, xt, y_train, final_train);
        double acc = evaluate_accuracy(trained, xv, y_val);
        bool better = !have || acc > best.val_accuracy ||
                      (acc == best.val_accuracy && gamma < best.gamma);
        if (better) {
            best.gamma = gamma;
            best.ranking = std::move(rank);
            best.val_accuracy = acc;
            have = true;
        }
    }
    return best;
}

std::vector<double> fqi_values(const NetworkParams& model, const Matrix& x,
                               const std::vector<std::vector<std::size_t>>& candidates) {
    FirstLayerCache cache(model, x);
    Matrix base = cache.forward_zeroed({});
    std::vector<double> values(candidates.size(), 0.0);
    parallel_for(candidates.size(), [&](std::size_t c) {
        Matrix out = cache.forward_zeroed(candidates[c]);
        double total = 0.0;
        for (std::size_t i = 0; i < out.v.size(); ++i) {
            double diff = out.v[i] - base.v[i];
            total += diff * diff;
        }
        values[c] = total;
    });
    return values;
}

FeatureRanking fqi_scores(const NetworkParams& model, const Matrix& x) {
    std::vector<std::vector<std::size_t>> singletons(x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) singletons[j] = {j};
    FeatureRanking rank;
    rank.method = "fqi";
    rank.scores = fqi_values(model, x, singletons);
    rank.order = order_by_score_desc(rank.scores);
    return rank;
}

std::vector<double> group_scores_sum(const std::vector<double>& feature_scores,
                                     const std::vector<std::vector<std::size_t>>& units) {
    std::vector<double> out(units.size(), 0.0);
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (std::size_t f : units[u]) {
            if (f >= feature_scores.size())
                throw ShapeError("group_scores_sum: feature index out of range");
            out[u] += feature_scores[f];
        }
    }
    return out;
}

}  // namespace amber
