#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebank/autodiff.hpp"
#include "wavebank/graph.hpp"
#include "wavebank/wavelet.hpp"

namespace wavebank {

enum class EncoderMode { kShared, kDedicated };

inline std::string to_string(EncoderMode m) {
    return m == EncoderMode::kShared ? "shared" : "dedicated";
}

inline EncoderMode encoder_mode_from_string(const std::string& s) {
    if (s == "shared") return EncoderMode::kShared;
    if (s == "dedicated") return EncoderMode::kDedicated;
    throw std::invalid_argument("unknown encoder mode: " + s);
}

struct ModelConfig {
    ViewConfig view;
    EncoderMode encoder_mode = EncoderMode::kDedicated;
    std::size_t embed_dim = 512;
    std::size_t proj_dim = 512;
    double lr = 0.001;
    std::size_t max_epochs = 2000;
    std::size_t patience = 20;
    double min_improvement = 1e-5;
    std::uint64_t seed = 1;
    bool paper_prefactor = false;   // 1/(N+K) instead of the mean over terms
    bool readout_sigmoid = false;   // squash the readout before projecting

    void validate() const {
        if (view.k < 1) throw std::invalid_argument("config: k must be >= 1");
        if (embed_dim < 1 || proj_dim < 1)
            throw std::invalid_argument("config: dims must be >= 1");
        if (patience > max_epochs && max_epochs > 0)
            throw std::invalid_argument("config: patience must be <= max_epochs");
        if (!(view.alpha > 0.0 && view.alpha < 1.0))
            throw std::invalid_argument("config: alpha must be in (0,1)");
        if (view.epsilon < 0.0)
            throw std::invalid_argument("config: epsilon must be >= 0");
        if (lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
    }
};

// Two-layer GCN: W1 (d_i x d), W2 (d x d), one PReLU slope per layer.
struct EncoderParams {
    TensorPtr w1, slope1, w2, slope2;
};

// Shared two-layer projection MLP.
struct ProjectionParams {
    TensorPtr m1, b1, slope_p, m2, b2;
};

struct ParamStore {
    std::vector<EncoderParams> encoders;  // one if shared, one per view if dedicated
    ProjectionParams projection;

    std::vector<TensorPtr> all() const {
        std::vector<TensorPtr> ps;
        for (const auto& e : encoders) {
            ps.push_back(e.w1);
            ps.push_back(e.slope1);
            ps.push_back(e.w2);
            ps.push_back(e.slope2);
        }
        ps.push_back(projection.m1);
        ps.push_back(projection.b1);
        ps.push_back(projection.slope_p);
        ps.push_back(projection.m2);
        ps.push_back(projection.b2);
        return ps;
    }

    void zero_grads() const {
        for (const auto& p : all()) p->zero_grad();
    }

    std::vector<Mat> snapshot() const {
        std::vector<Mat> vals;
        for (const auto& p : all()) vals.push_back(p->value);
        return vals;
    }

    void restore(const std::vector<Mat>& vals) const {
        auto ps = all();
        if (vals.size() != ps.size())
            throw std::invalid_argument("ParamStore::restore: size mismatch");
        for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = vals[i];
    }
};

inline EncoderParams init_encoder(std::size_t d_in, std::size_t d, std::mt19937_64& rng) {
    EncoderParams e;
    e.w1 = make_leaf(glorot_uniform(d_in, d, rng), true);
    e.slope1 = make_scalar(0.25, true);
    e.w2 = make_leaf(glorot_uniform(d, d, rng), true);
    e.slope2 = make_scalar(0.25, true);
    return e;
}

inline ParamStore init_params(std::size_t d_in, std::size_t n_views,
                              const ModelConfig& cfg, std::mt19937_64& rng) {
    ParamStore ps;
    std::size_t n_enc = cfg.encoder_mode == EncoderMode::kShared ? 1 : n_views;
    for (std::size_t i = 0; i < n_enc; ++i)
        ps.encoders.push_back(init_encoder(d_in, cfg.embed_dim, rng));
    ps.projection.m1 = make_leaf(glorot_uniform(cfg.embed_dim, cfg.proj_dim, rng), true);
    // Small positive bias keeps the hidden preactivation off the PReLU kink
    // even when a view's readout is numerically zero.
    ps.projection.b1 = make_leaf(
        Mat::Constant(1, static_cast<Eigen::Index>(cfg.proj_dim), 0.01), true);
    ps.projection.slope_p = make_scalar(0.25, true);
    ps.projection.m2 = make_leaf(glorot_uniform(cfg.proj_dim, cfg.proj_dim, rng), true);
    ps.projection.b2 = make_leaf(Mat::Zero(1, static_cast<Eigen::Index>(cfg.proj_dim)), true);
    return ps;
}

// H_k = prelu(view * prelu(view * X * W1) * W2).
inline TensorPtr gcn_encode(Tape& tape, const SparseMatrix& view, const TensorPtr& x,
                            const EncoderParams& enc) {
    auto h1 = tape.prelu(tape.spmm_const(view, tape.matmul(x, enc.w1)), enc.slope1);
    return tape.prelu(tape.spmm_const(view, tape.matmul(h1, enc.w2)), enc.slope2);
}

inline TensorPtr readout(Tape& tape, const TensorPtr& h, bool squash = false) {
    if (h->value.rows() < 1) throw std::invalid_argument("readout: empty input");
    auto v = tape.row_mean(h);
    return squash ? tape.sigmoid(v) : v;
}

inline TensorPtr project(Tape& tape, const TensorPtr& v, const ProjectionParams& proj) {
    auto hidden = tape.prelu(tape.add_bias(tape.matmul(v, proj.m1), proj.b1),
                             proj.slope_p);
    return tape.add_bias(tape.matmul(hidden, proj.m2), proj.b2);
}

// Feature-row shuffle; the view matrices are left untouched.
inline Mat corrupt(const Mat& x, std::uint64_t seed) {
    if (x.rows() < 2) throw std::invalid_argument("corrupt: need at least 2 rows");
    std::size_t n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = rng() % (i + 1);
        std::swap(perm[i], perm[j]);
    }
    Mat out(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i)
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
    return out;
}

// sigma(<h, z>): node-summary agreement probability.
inline double discriminate(const Mat& h, const Mat& z) {
    if (h.cols() != z.cols() || h.rows() != 1 || z.rows() != 1)
        throw std::invalid_argument("discriminate: expected matching 1 x d rows");
    double score = (h.array() * z.array()).sum();
    return 1.0 / (1.0 + std::exp(-score));
}

// For every ordered view pair (k, j != k): rows of H_j score against z_k
// with target 1, rows of Hc_j with target 0.  Normalized by the total term
// count 2*N*V*(V-1), or by the literal N+K prefactor when requested.
inline TensorPtr contrastive_loss(Tape& tape, const std::vector<TensorPtr>& h,
                                  const std::vector<TensorPtr>& hc,
                                  const std::vector<TensorPtr>& z,
                                  bool paper_prefactor = false) {
    std::size_t v = h.size();
    if (v < 1) throw std::invalid_argument("contrastive_loss: need at least 1 view");
    if (hc.size() != v || z.size() != v)
        throw std::invalid_argument("contrastive_loss: list length mismatch");
    std::size_t n = static_cast<std::size_t>(h[0]->value.rows());

    // With a single view there are no cross-view pairs; fall back to
    // contrasting the view against its own summary.
    TensorPtr total;
    for (std::size_t k = 0; k < v; ++k) {
        auto zt = tape.transpose(z[k]);
        for (std::size_t j = 0; j < v; ++j) {
            if (v > 1 && j == k) continue;
            auto pos = tape.bce_logits_sum(tape.matmul(h[j], zt), 1.0);
            auto neg = tape.bce_logits_sum(tape.matmul(hc[j], zt), 0.0);
            auto pair = tape.add(pos, neg);
            total = total ? tape.add(total, pair) : pair;
        }
    }
    std::size_t pairs = v > 1 ? v * (v - 1) : 1;
    double denom = paper_prefactor ? static_cast<double>(n + v)
                                   : static_cast<double>(2 * n * pairs);
    auto loss = tape.scale(total, 1.0 / denom);
    if (!std::isfinite(loss->value(0, 0)))
        throw std::runtime_error("contrastive_loss: non-finite loss");
    return loss;
}

inline Mat pooled_embedding(const std::vector<Mat>& h_views) {
    if (h_views.empty())
        throw std::invalid_argument("pooled_embedding: empty view list");
    Mat sum = h_views[0];
    for (std::size_t i = 1; i < h_views.size(); ++i) sum += h_views[i];
    return sum / static_cast<double>(h_views.size());
}

struct TrainHistory {
    std::vector<double> loss;
    std::size_t best_epoch = 0;
    std::string stopping_reason;
};

struct TrainResult {
    ParamStore params;
    TrainHistory history;
    Mat embedding;  // pooled clean embedding at the best parameters
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t epoch) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (epoch + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline const EncoderParams& encoder_for_view(const ParamStore& ps, std::size_t k) {
    return ps.encoders.size() == 1 ? ps.encoders[0] : ps.encoders[k];
}

}  // namespace detail

inline std::vector<Mat> encode_all_views(const Graph& g, const ViewSet& views,
                                         const ParamStore& ps,
                                         const ModelConfig& cfg) {
    std::vector<Mat> hs;
    auto x = make_leaf(g.features, false);
    for (std::size_t k = 0; k < views.views.size(); ++k) {
        Tape tape;
        hs.push_back(
            gcn_encode(tape, views.views[k], x, detail::encoder_for_view(ps, k))->value);
    }
    (void)cfg;
    return hs;
}

inline TrainResult train(const Graph& g, const ViewSet& views, const ModelConfig& cfg) {
    cfg.validate();
    std::size_t n_views = views.views.size();
    std::mt19937_64 rng(cfg.seed);
    std::size_t d_in = static_cast<std::size_t>(g.features.cols());

    TrainResult result;
    result.params = init_params(d_in, n_views, cfg, rng);
    auto params = result.params.all();
    AdamState adam(params, cfg.lr);

    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<Mat> best_values = result.params.snapshot();
    std::size_t stale = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Mat xc = corrupt(g.features, detail::mix_seed(cfg.seed, epoch));
        result.params.zero_grads();

        Tape tape;
        auto x = make_leaf(g.features, false);
        auto xcorr = make_leaf(xc, false);
        std::vector<TensorPtr> h, hc, z;
        for (std::size_t k = 0; k < n_views; ++k) {
            const auto& enc = detail::encoder_for_view(result.params, k);
            h.push_back(gcn_encode(tape, views.views[k], x, enc));
            hc.push_back(gcn_encode(tape, views.views[k], xcorr, enc));
            z.push_back(project(tape, readout(tape, h.back(), cfg.readout_sigmoid),
                                result.params.projection));
        }
        auto loss = contrastive_loss(tape, h, hc, z, cfg.paper_prefactor);
        double loss_val = loss->value(0, 0);
        if (!std::isfinite(loss_val))
            throw std::runtime_error("train: non-finite loss at epoch " +
                                     std::to_string(epoch));
        result.history.loss.push_back(loss_val);

        if (loss_val < best_loss - cfg.min_improvement) {
            best_loss = loss_val;
            result.history.best_epoch = epoch;
            best_values = result.params.snapshot();
            stale = 0;
        } else if (++stale >= cfg.patience) {
            result.history.stopping_reason = "early stop: no improvement for " +
                                             std::to_string(cfg.patience) + " epochs";
            break;
        }

        tape.backward(loss);
        adam_step(params, adam);
    }
    if (result.history.stopping_reason.empty())
        result.history.stopping_reason =
            cfg.max_epochs == 0 ? "max_epochs = 0" : "reached max_epochs";

    result.params.restore(best_values);
    result.embedding = pooled_embedding(encode_all_views(g, views, result.params, cfg));
    return result;
}

}  // namespace wavebank
