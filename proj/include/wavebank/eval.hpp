#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "wavebank/sparse.hpp"

namespace wavebank {

struct ClusterResult {
    std::vector<int> labels;
    std::size_t n_clusters = 0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double silhouette = 0.0;
};

// Agglomerative single-linkage under Euclidean distance, cut at k clusters.
// Merge ties break on the smallest (i, j) cluster-representative pair.
inline std::vector<int> single_linkage_cluster(const Mat& h, std::size_t k) {
    std::size_t n = static_cast<std::size_t>(h.rows());
    if (k < 1 || k > n)
        throw std::invalid_argument("single_linkage_cluster: k out of range");

    // dist[i][j] holds the current single-linkage distance between live
    // clusters; clusters are named by their smallest member index.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = (h.row(static_cast<Eigen::Index>(i)) -
                        h.row(static_cast<Eigen::Index>(j)))
                           .norm();
            dist[i][j] = dist[j][i] = d;
        }

    std::vector<bool> alive(n, true);
    std::vector<int> member(n);
    std::iota(member.begin(), member.end(), 0);

    for (std::size_t live = n; live > k; --live) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // merge bj into bi (bi < bj keeps cluster names minimal)
        alive[bj] = false;
        for (std::size_t t = 0; t < n; ++t) {
            if (!alive[t] || t == bi) continue;
            double d = std::min(dist[bi][t], dist[bj][t]);
            dist[bi][t] = dist[t][bi] = d;
        }
        for (std::size_t t = 0; t < n; ++t)
            if (member[t] == static_cast<int>(bj)) member[t] = static_cast<int>(bi);
    }

    // relabel to contiguous ids in order of first appearance
    std::map<int, int> remap;
    std::vector<int> labels(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto it = remap.find(member[t]);
        if (it == remap.end()) it = remap.emplace(member[t], static_cast<int>(remap.size())).first;
        labels[t] = it->second;
    }
    return labels;
}

namespace detail {

inline double entropy(const std::map<int, std::size_t>& counts, std::size_t total) {
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace detail

// h = 1 - H(C|K)/H(C), c = 1 - H(K|C)/H(K) over the joint contingency
// table, natural-log entropies.
inline std::pair<double, double> homogeneity_completeness(
    const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw std::invalid_argument("homogeneity_completeness: length mismatch");
    std::size_t n = truth.size();
    std::map<int, std::size_t> ct, cp;
    std::map<std::pair<int, int>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++ct[truth[i]];
        ++cp[pred[i]];
        ++joint[{truth[i], pred[i]}];
    }
    double h_c = detail::entropy(ct, n);
    double h_k = detail::entropy(cp, n);
    double h_joint = 0.0;
    for (const auto& [_, c] : joint) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        h_joint -= p * std::log(p);
    }
    double h_c_given_k = h_joint - h_k;
    double h_k_given_c = h_joint - h_c;
    double homogeneity = h_c > 0.0 ? 1.0 - h_c_given_k / h_c : 1.0;
    double completeness = h_k > 0.0 ? 1.0 - h_k_given_c / h_k : 1.0;
    return {homogeneity, completeness};
}

// Mean over points of (b - a)/max(a, b); singleton clusters score 0.
inline double silhouette(const Mat& h, const std::vector<int>& labels) {
    std::size_t n = static_cast<std::size_t>(h.rows());
    if (labels.size() != n)
        throw std::invalid_argument("silhouette: length mismatch");
    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2)
        throw std::invalid_argument("silhouette: need at least 2 clusters");

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;  // contributes 0
        std::map<int, double> sum_d;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = (h.row(static_cast<Eigen::Index>(i)) -
                        h.row(static_cast<Eigen::Index>(j)))
                           .norm();
            sum_d[labels[j]] += d;
        }
        double a = sum_d[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [l, s] : sum_d) {
            if (l == labels[i]) continue;
            b = std::min(b, s / static_cast<double>(sizes[l]));
        }
        double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

struct SplitSpec {
    // 10 repetitions of disjoint, exhaustive 60/20/20 index sets.
    std::vector<std::vector<std::size_t>> train, val, test;
    std::uint64_t seed = 0;

    std::size_t repetitions() const { return train.size(); }
};

inline SplitSpec random_splits(std::size_t n, std::uint64_t seed,
                               std::size_t repetitions = 10) {
    if (n < 5) throw std::invalid_argument("random_splits: need at least 5 samples");
    SplitSpec spec;
    spec.seed = seed;
    std::size_t n_val = n / 5, n_test = n / 5;
    std::size_t n_train = n - n_val - n_test;  // remainder goes to train
    for (std::size_t r = 0; r < repetitions; ++r) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(seed + 0x51ab5f1ULL * (r + 1));
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(idx[i], idx[rng() % (i + 1)]);
        spec.train.emplace_back(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        spec.val.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                              idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        spec.test.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                               idx.end());
    }
    return spec;
}

struct ProbeResult {
    std::vector<double> per_split;
    double mean = 0.0;
    double stddev = 0.0;
};

namespace detail {

// Multinomial logistic regression by full-batch Adam; returns accuracy on
// the given index set using the weights chosen by validation accuracy.
struct LogisticModel {
    Mat w;  // d x c
    Mat b;  // 1 x c

    double accuracy(const Mat& h, const std::vector<int>& y,
                    const std::vector<std::size_t>& idx) const {
        std::size_t hit = 0;
        for (std::size_t i : idx) {
            Eigen::Index row = static_cast<Eigen::Index>(i);
            Mat logits = h.row(row) * w + b;
            Eigen::Index arg = 0;
            logits.row(0).maxCoeff(&arg);
            if (static_cast<int>(arg) == y[i]) ++hit;
        }
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    }
};

inline LogisticModel fit_logistic(const Mat& h, const std::vector<int>& y,
                                  const std::vector<std::size_t>& train_idx,
                                  const std::vector<std::size_t>& val_idx,
                                  std::size_t n_classes, double lambda = 1e-4,
                                  double lr = 0.01, std::size_t max_steps = 1000) {
    Eigen::Index d = h.cols();
    Eigen::Index c = static_cast<Eigen::Index>(n_classes);
    std::size_t n = train_idx.size();

    Mat x(static_cast<Eigen::Index>(n), d);
    std::vector<int> yt(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.row(static_cast<Eigen::Index>(i)) = h.row(static_cast<Eigen::Index>(train_idx[i]));
        yt[i] = y[train_idx[i]];
    }

    LogisticModel model{Mat::Zero(d, c), Mat::Zero(1, c)};
    Mat mw = Mat::Zero(d, c), vw = Mat::Zero(d, c);
    Mat mb = Mat::Zero(1, c), vb = Mat::Zero(1, c);
    LogisticModel best = model;
    double best_val = -1.0;

    for (std::size_t step = 1; step <= max_steps; ++step) {
        Mat logits = (x * model.w).rowwise() + model.b.row(0);
        Mat probs(logits.rows(), logits.cols());
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            double mx = logits.row(i).maxCoeff();
            Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
            probs.row(i) = (e / e.sum()).matrix();
        }
        Mat delta = probs;
        for (std::size_t i = 0; i < n; ++i)
            delta(static_cast<Eigen::Index>(i), yt[i]) -= 1.0;
        delta /= static_cast<double>(n);
        Mat gw = x.transpose() * delta + lambda * model.w;
        Mat gb = delta.colwise().sum();

        double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step));
        mw = 0.9 * mw + 0.1 * gw;
        vw.array() = 0.999 * vw.array() + 0.001 * gw.array().square();
        mb = 0.9 * mb + 0.1 * gb;
        vb.array() = 0.999 * vb.array() + 0.001 * gb.array().square();
        model.w.array() -= lr * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + 1e-8);
        model.b.array() -= lr * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + 1e-8);

        if (step % 10 == 0 || step == max_steps) {
            double val_acc = model.accuracy(h, y, val_idx);
            if (val_acc > best_val) {
                best_val = val_acc;
                best = model;
            }
        }
    }
    return best;
}

}  // namespace detail

inline ProbeResult logistic_probe(const Mat& h, const std::vector<int>& y,
                                  const SplitSpec& splits) {
    if (static_cast<std::size_t>(h.rows()) != y.size())
        throw std::invalid_argument("logistic_probe: length mismatch");
    int max_label = -1;
    for (int l : y) max_label = std::max(max_label, l);
    std::size_t n_classes = static_cast<std::size_t>(max_label + 1);

    ProbeResult res;
    for (std::size_t r = 0; r < splits.repetitions(); ++r) {
        std::vector<std::size_t> train = splits.train[r], val = splits.val[r],
                                 test = splits.test[r];
        // a training split missing a class gets resampled with a shifted seed
        auto covers = [&](const std::vector<std::size_t>& idx) {
            std::vector<bool> seen(n_classes, false);
            for (std::size_t i : idx) seen[static_cast<std::size_t>(y[i])] = true;
            return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
        };
        std::size_t retries = 0;
        while (!covers(train)) {
            if (++retries > 5)
                throw std::runtime_error("logistic_probe: degenerate split after 5 retries");
            auto alt = random_splits(y.size(), splits.seed + 7919 * retries + r, 1);
            train = alt.train[0];
            val = alt.val[0];
            test = alt.test[0];
        }
        auto model = detail::fit_logistic(h, y, train, val, n_classes);
        res.per_split.push_back(model.accuracy(h, y, test));
    }
    double sum = std::accumulate(res.per_split.begin(), res.per_split.end(), 0.0);
    res.mean = sum / static_cast<double>(res.per_split.size());
    double sq = 0.0;
    for (double a : res.per_split) sq += (a - res.mean) * (a - res.mean);
    res.stddev = std::sqrt(sq / static_cast<double>(res.per_split.size()));
    return res;
}

// First two principal components of the column-centered matrix, with the
// largest-magnitude loading of each direction made positive.
inline Mat pca2(const Mat& h) {
    if (h.rows() < 2) throw std::invalid_argument("pca2: need at least 2 rows");
    Mat centered = h.rowwise() - h.colwise().mean();
    if (h.cols() < 2) {
        Mat out = Mat::Zero(h.rows(), 2);
        out.col(0) = centered.col(0);
        return out;
    }
    Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeThinV);
    Mat v = svd.matrixV().leftCols(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
        Eigen::Index arg = 0;
        v.col(c).cwiseAbs().maxCoeff(&arg);
        if (v(arg, c) < 0.0) v.col(c) = -v.col(c);
    }
    return centered * v;
}

}  // namespace wavebank
