#pragma once

// Histogram-based gradient-boosted regression trees for the squared-error
// objective (g = yhat - y, h = 1). Bin edges come from per-feature training
// quantiles computed once before boosting; split gain is the standard
// second-order formula with L2 regularization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/features.hpp"
#include "evload/rng.hpp"

namespace evload {

struct GbtConfig {
    double learning_rate = 0.05;
    int max_depth = 8;
    double subsample = 0.8;
    double colsample_bytree = 0.8;
    double lambda_l2 = 1.0;
    int max_rounds = 2000;
    int early_stop_patience = 200;
    int histogram_bins = 256;
    double min_child_weight = 1.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (subsample <= 0.0 || subsample > 1.0 || colsample_bytree <= 0.0 ||
            colsample_bytree > 1.0)
            throw std::invalid_argument("gbt: sampling fractions must be in (0,1]");
        if (max_depth < 1) throw std::invalid_argument("gbt: max_depth must be >= 1");
    }
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(const double* row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                           : nodes[i].right;
        return nodes[i].leaf;
    }
};

struct Ensemble {
    double base_score = 0.0;
    double learning_rate = 0.05;
    std::vector<Tree> trees;
    int best_round = 0;  // number of trees actually used for prediction
    int n_features = 0;

    double predict_row(const double* row) const {
        double p = base_score;
        for (int t = 0; t < best_round; ++t)
            p += learning_rate * trees[t].predict_row(row);
        return p;
    }

    std::vector<double> predict(const FeatureMatrix& m) const {
        if (static_cast<int>(m.n_cols) != n_features)
            throw std::runtime_error("gbt predict: feature count mismatch");
        std::vector<double> out(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) out[r] = predict_row(m.row(r));
        return out;
    }
};

struct BinStat {
    double g = 0.0;
    double h = 0.0;
    std::int64_t count = 0;
};

// Quantile bin edges for one feature; values <= edges[b] fall in bins <= b.
inline std::vector<double> quantile_edges(std::vector<double> values, int bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    const std::size_t n = values.size();
    for (int i = 1; i < bins; ++i) {
        double e = values[std::min(n - 1, i * n / bins)];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    // an edge equal to the maximum splits nothing; drop it
    while (!edges.empty() && edges.back() >= values.back()) edges.pop_back();
    return edges;
}

// Count of edges strictly below v, so bin(v) <= b exactly when v <= edges[b].
inline int bin_of(double v, const std::vector<double>& edges) {
    return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) -
                            edges.begin());
}

inline std::vector<BinStat> build_histogram(const std::vector<double>& values,
                                            const std::vector<double>& g,
                                            const std::vector<double>& h,
                                            const std::vector<double>& edges) {
    std::vector<BinStat> bins(edges.size() + 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        BinStat& b = bins[bin_of(values[i], edges)];
        b.g += g[i];
        b.h += h[i];
        b.count += 1;
    }
    return bins;
}

struct SplitChoice {
    int feature = -1;
    int bin = -1;  // left = bins [0..bin]
    double gain = 0.0;
};

// Scan all (feature, bin) candidates; ties broken by lowest feature then bin.
inline std::optional<SplitChoice> best_split(
    const std::vector<std::vector<BinStat>>& hists,
    const std::vector<int>& feature_ids, double lambda, double gamma,
    double min_child_weight) {
    std::optional<SplitChoice> best;
    for (std::size_t f = 0; f < hists.size(); ++f) {
        const auto& bins = hists[f];
        double G = 0.0, H = 0.0;
        for (const auto& b : bins) {
            G += b.g;
            H += b.h;
        }
        double parent = G * G / (H + lambda);
        double gl = 0.0, hl = 0.0;
        for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
            gl += bins[b].g;
            hl += bins[b].h;
            double gr = G - gl, hr = H - hl;
            if (hl < min_child_weight || hr < min_child_weight) continue;
            double gain =
                0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent) -
                gamma;
            if (gain > 0.0 && (!best || gain > best->gain))
                best = SplitChoice{feature_ids[f], static_cast<int>(b), gain};
        }
    }
    return best;
}

namespace detail {

struct BinnedData {
    std::size_t rows = 0, cols = 0;
    std::vector<std::vector<double>> edges;     // per feature
    std::vector<std::uint16_t> codes;           // row-major bin indices

    int code(std::size_t r, std::size_t c) const { return codes[r * cols + c]; }
};

inline BinnedData bin_features(const double* X, std::size_t rows, std::size_t cols,
                               int bins) {
    BinnedData bd;
    bd.rows = rows;
    bd.cols = cols;
    bd.edges.resize(cols);
    bd.codes.resize(rows * cols);
    std::vector<double> col(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) col[r] = X[r * cols + c];
        bd.edges[c] = quantile_edges(col, bins);
        for (std::size_t r = 0; r < rows; ++r)
            bd.codes[r * cols + c] =
                static_cast<std::uint16_t>(bin_of(X[r * cols + c], bd.edges[c]));
    }
    return bd;
}

}  // namespace detail

// Rows [0, train_rows) of X/y train; rows [train_rows, rows) are the
// early-stopping validation slice.
inline Ensemble boost(const double* X, const double* y, std::size_t rows,
                      std::size_t cols, std::size_t train_rows,
                      const GbtConfig& cfg) {
    cfg.validate();
    if (train_rows == 0 || train_rows >= rows)
        throw std::invalid_argument("gbt boost: empty train or validation slice");

    const std::size_t n_val = rows - train_rows;
    Ensemble ens;
    ens.learning_rate = cfg.learning_rate;
    ens.n_features = static_cast<int>(cols);
    double mean = 0.0;
    for (std::size_t r = 0; r < train_rows; ++r) mean += y[r];
    ens.base_score = mean / static_cast<double>(train_rows);

    auto bd = detail::bin_features(X, train_rows, cols, cfg.histogram_bins);

    std::vector<double> pred(train_rows, ens.base_score);
    std::vector<double> val_pred(n_val, ens.base_score);
    std::vector<double> grad(train_rows);

    auto val_rmse = [&]() {
        double ss = 0.0;
        for (std::size_t i = 0; i < n_val; ++i) {
            double d = val_pred[i] - y[train_rows + i];
            ss += d * d;
        }
        return std::sqrt(ss / static_cast<double>(n_val));
    };

    double best_rmse = val_rmse();
    int rounds_since_best = 0;
    const bool sample_rows = cfg.subsample < 1.0;
    const bool sample_cols = cfg.colsample_bytree < 1.0;
    RngStream rng(cfg.seed, "gbt");

    std::vector<std::size_t> all_rows(train_rows);
    for (std::size_t i = 0; i < train_rows; ++i) all_rows[i] = i;
    std::vector<int> all_cols(cols);
    for (std::size_t c = 0; c < cols; ++c) all_cols[c] = static_cast<int>(c);

    for (int round = 0; round < cfg.max_rounds; ++round) {
        for (std::size_t r = 0; r < train_rows; ++r) grad[r] = pred[r] - y[r];

        std::vector<std::size_t> root_rows;
        if (sample_rows) {
            auto pool = all_rows;
            rng.shuffle(pool);
            std::size_t take = std::max<std::size_t>(
                1, static_cast<std::size_t>(cfg.subsample * train_rows));
            root_rows.assign(pool.begin(), pool.begin() + take);
            std::sort(root_rows.begin(), root_rows.end());
        } else {
            root_rows = all_rows;
        }

        std::vector<int> feats;
        if (sample_cols) {
            auto pool = all_cols;
            rng.shuffle(pool);
            std::size_t take = std::max<std::size_t>(
                1, static_cast<std::size_t>(cfg.colsample_bytree * cols));
            feats.assign(pool.begin(), pool.begin() + take);
            std::sort(feats.begin(), feats.end());
        } else {
            feats = all_cols;
        }

        Tree tree;
        struct Work {
            int node;
            int depth;
            std::vector<std::size_t> rows;
        };
        tree.nodes.emplace_back();
        std::vector<Work> queue{{0, 1, std::move(root_rows)}};

        while (!queue.empty()) {
            Work w = std::move(queue.back());
            queue.pop_back();
            double G = 0.0, H = 0.0;
            for (std::size_t r : w.rows) {
                G += grad[r];
                H += 1.0;
            }
            auto make_leaf = [&]() {
                tree.nodes[w.node].feature = -1;
                tree.nodes[w.node].leaf = -G / (H + cfg.lambda_l2);
            };
            if (w.depth > cfg.max_depth || w.rows.size() < 2) {
                make_leaf();
                continue;
            }
            std::vector<std::vector<BinStat>> hists(feats.size());
            for (std::size_t f = 0; f < feats.size(); ++f) {
                auto& bins = hists[f];
                bins.assign(bd.edges[feats[f]].size() + 1, BinStat{});
                for (std::size_t r : w.rows) {
                    BinStat& b = bins[bd.code(r, feats[f])];
                    b.g += grad[r];
                    b.h += 1.0;
                    b.count += 1;
                }
            }
            auto choice = best_split(hists, feats, cfg.lambda_l2, cfg.gamma,
                                     cfg.min_child_weight);
            if (!choice) {
                make_leaf();
                continue;
            }
            std::vector<std::size_t> left, right;
            for (std::size_t r : w.rows)
                (bd.code(r, choice->feature) <= choice->bin ? left : right)
                    .push_back(r);
            int li = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& nd = tree.nodes[w.node];
            nd.feature = choice->feature;
            nd.threshold = bd.edges[choice->feature][choice->bin];
            nd.left = li;
            nd.right = li + 1;
            queue.push_back({li, w.depth + 1, std::move(left)});
            queue.push_back({li + 1, w.depth + 1, std::move(right)});
        }

        for (std::size_t r = 0; r < train_rows; ++r)
            pred[r] += cfg.learning_rate * tree.predict_row(X + r * cols);
        for (std::size_t i = 0; i < n_val; ++i)
            val_pred[i] +=
                cfg.learning_rate * tree.predict_row(X + (train_rows + i) * cols);
        ens.trees.push_back(std::move(tree));

        double rmse = val_rmse();
        if (rmse < best_rmse) {
            best_rmse = rmse;
            ens.best_round = round + 1;
            rounds_since_best = 0;
        } else if (++rounds_since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    return ens;
}

inline Ensemble boost(const FeatureMatrix& m, std::size_t train_rows,
                      const GbtConfig& cfg) {
    std::vector<double> y = m.target;
    return boost(m.data.data(), y.data(), m.rows(), m.n_cols, train_rows, cfg);
}

// --- text serialization (per-tree preorder node list) -----------------------

inline void save_ensemble(const Ensemble& e, std::ostream& os) {
    os.precision(17);
    os << "gbt " << e.base_score << " " << e.learning_rate << " " << e.best_round
       << " " << e.n_features << " " << e.trees.size() << "\n";
    for (const auto& t : e.trees) {
        os << "tree " << t.nodes.size() << "\n";
        for (const auto& n : t.nodes) {
            if (n.feature < 0)
                os << "leaf " << n.leaf << "\n";
            else
                os << "split " << n.feature << " " << n.threshold << " " << n.left
                   << " " << n.right << "\n";
        }
    }
}

inline Ensemble load_ensemble(std::istream& is) {
    Ensemble e;
    std::string tag;
    if (!(is >> tag) || tag != "gbt")
        throw std::runtime_error("gbt load: bad header");
    std::size_t n_trees = 0;
    is >> e.base_score >> e.learning_rate >> e.best_round >> e.n_features >> n_trees;
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t n;
        if (!(is >> tag >> n) || tag != "tree")
            throw std::runtime_error("gbt load: bad tree header");
        Tree tree;
        tree.nodes.resize(n);
        for (auto& nd : tree.nodes) {
            is >> tag;
            if (tag == "leaf") {
                is >> nd.leaf;
            } else if (tag == "split") {
                is >> nd.feature >> nd.threshold >> nd.left >> nd.right;
            } else {
                throw std::runtime_error("gbt load: bad node tag");
            }
        }
        e.trees.push_back(std::move(tree));
    }
    return e;
}

}  // namespace evload
