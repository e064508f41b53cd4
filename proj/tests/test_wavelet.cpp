#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wavebank/synth.hpp"
#include "wavebank/wavelet.hpp"

using namespace wavebank;

namespace {

// Erdos-Renyi graph with every node given at least implicit support via the
// isolated-node fallback in column_normalize.
Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < p) edges.emplace_back(i, j);
        }
    return make_graph(n, edges, Mat::Zero(static_cast<Eigen::Index>(n), 1));
}

SparseMatrix two_node_t_half() {
    Mat a(2, 2);
    a << 0, 1, 1, 0;
    return lazy_diffusion(column_normalize(from_dense(a)), 0.5).matrix;
}

}  // namespace

TEST_CASE("lazy_diffusion: hand-evaluated 2-node case") {
    Mat expected(2, 2);
    expected << 0.5, 0.5, 0.5, 0.5;
    CHECK(two_node_t_half().to_dense().isApprox(expected, 1e-15));
}

TEST_CASE("lazy_diffusion: alpha near 1 approaches identity") {
    Mat a(2, 2);
    a << 0, 1, 1, 0;
    auto t = lazy_diffusion(column_normalize(from_dense(a)), 0.999);
    CHECK((t.matrix.to_dense() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("lazy_diffusion contract errors") {
    auto a1 = column_normalize(sparse_identity(2));
    CHECK_THROWS_AS(lazy_diffusion(a1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lazy_diffusion(a1, 1.0), std::invalid_argument);
    // non-stochastic input
    Mat bad(2, 2);
    bad << 0.5, 0.5, 0.2, 0.5;
    CHECK_THROWS_AS(lazy_diffusion(from_dense(bad), 0.2), std::invalid_argument);
}

TEST_CASE("lazy_diffusion is column-stochastic with isolated nodes") {
    std::mt19937_64 rng(1);
    Graph g = random_graph(40, 0.02, rng);  // sparse enough to isolate nodes
    auto t = lazy_diffusion(column_normalize(g.adjacency), 0.2);
    for (double s : column_sums(t.matrix))
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    // diagonal entries at least alpha
    for (std::size_t i = 0; i < t.matrix.n_rows; ++i)
        CHECK(t.matrix.at(i, i) >= 0.2 - 1e-15);
}

TEST_CASE("build_filters: 2-node hand evaluation, idempotent T") {
    DiffusionOperator t{two_node_t_half(), 0.5};
    auto bank = build_filters(t, 2);
    Mat phi1(2, 2);
    phi1 << 0.5, -0.5, -0.5, 0.5;
    CHECK(bank.filters[0].to_dense().isApprox(phi1, 1e-15));
    // T idempotent here, so Phi_2 = T - T^2 = 0
    CHECK(bank.filters[1].nnz() == 0);
    CHECK(bank.scales == std::vector<std::size_t>{1, 2});
}

TEST_CASE("telescoping identity: sum of filters = I - T^{2^{K-1}}") {
    std::mt19937_64 rng(9);
    for (std::size_t k = 1; k <= 4; ++k) {
        Graph g = random_graph(60, 0.08, rng);
        auto t = lazy_diffusion(column_normalize(g.adjacency), 0.2);
        auto bank = build_filters(t, k);
        Mat sum = Mat::Zero(60, 60);
        for (const auto& f : bank.filters) sum += f.to_dense();
        Mat expected = Mat::Identity(60, 60) - bank.residual.to_dense();
        CHECK((sum - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("raw filter columns sum to zero") {
    std::mt19937_64 rng(13);
    Graph g = random_graph(50, 0.08, rng);
    auto bank = build_filters(lazy_diffusion(column_normalize(g.adjacency), 0.2), 4);
    for (const auto& f : bank.filters)
        for (double s : column_sums(f)) CHECK(std::abs(s) < 1e-9);
}

TEST_CASE("repeated squaring agrees with naive iterated products") {
    std::mt19937_64 rng(17);
    Graph g = random_graph(50, 0.1, rng);
    auto t = lazy_diffusion(column_normalize(g.adjacency), 0.2);
    auto bank = build_filters(t, 4);  // residual is T^8
    SparseMatrix naive = t.matrix;
    for (int i = 1; i < 8; ++i) naive = sparse_matmul(naive, t.matrix);
    CHECK((bank.residual.to_dense() - naive.to_dense()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("build_filters rejects K < 1") {
    DiffusionOperator t{two_node_t_half(), 0.5};
    CHECK_THROWS_AS(build_filters(t, 0), std::invalid_argument);
}

TEST_CASE("sparsify: modes, idempotence, and the signed literal") {
    Mat phi1(2, 2);
    phi1 << 0.5, -0.5, -0.5, 0.5;
    auto m = from_dense(phi1);

    auto noop = sparsify(m, 0.0, ThresholdMode::kAbsolute);
    CHECK(noop.to_dense().isApprox(phi1));

    auto sgn = sparsify(m, 0.1, ThresholdMode::kSigned);
    Mat diag = Mat::Zero(2, 2);
    diag(0, 0) = diag(1, 1) = 0.5;
    CHECK(sgn.to_dense().isApprox(diag));

    auto abs = sparsify(m, 0.1, ThresholdMode::kAbsolute);
    CHECK(abs.to_dense().isApprox(phi1));

    for (auto mode : {ThresholdMode::kAbsolute, ThresholdMode::kSigned}) {
        auto once = sparsify(m, 0.3, mode);
        auto twice = sparsify(once, 0.3, mode);
        CHECK(once.to_dense().isApprox(twice.to_dense()));
        CHECK(once.nnz() == twice.nnz());
    }
}

TEST_CASE("normalize_view cases") {
    // stochastic nonnegative input unchanged
    auto t = two_node_t_half();
    CHECK(normalize_view(t).to_dense().isApprox(t.to_dense(), 1e-15));
    // diag(0.5, 0.5) -> identity
    Mat half = 0.5 * Mat::Identity(2, 2);
    CHECK(normalize_view(from_dense(half)).to_dense().isApprox(Mat::Identity(2, 2)));
}

TEST_CASE("build_view_set composition and sizing") {
    SyntheticDataset ds = make_house_dataset(3);

    ViewConfig cfg;
    cfg.k = 4;
    CHECK(build_view_set(ds.graph, cfg).views.size() == 4);

    cfg.k = 2;
    cfg.include_local_adjacency = true;
    auto vs = build_view_set(ds.graph, cfg);
    CHECK(vs.views.size() == 3);
    CHECK(vs.includes_local_adjacency);
    // first view is the column-normalized adjacency
    CHECK(vs.views[0].to_dense().isApprox(
        column_normalize(ds.graph.adjacency).to_dense(), 1e-15));

    // K=1, epsilon=0: the single view is normalize_view(I - T)
    cfg.k = 1;
    cfg.epsilon = 0.0;
    cfg.include_local_adjacency = false;
    auto single = build_view_set(ds.graph, cfg);
    auto t = lazy_diffusion(column_normalize(ds.graph.adjacency), cfg.alpha);
    auto expected = normalize_view(
        sparse_add(sparse_identity(ds.graph.n_nodes), t.matrix, 1.0, -1.0));
    CHECK(single.views[0].to_dense().isApprox(expected.to_dense(), 1e-12));
}

TEST_CASE("views carry no stored entries below epsilon before renormalization") {
    SyntheticDataset ds = make_varied_dataset(5);
    ViewConfig cfg;
    cfg.k = 3;
    cfg.epsilon = 1e-3;
    auto t = lazy_diffusion(column_normalize(ds.graph.adjacency), cfg.alpha);
    auto bank = build_filters(t, cfg.k);
    for (const auto& phi : bank.filters) {
        auto pruned = sparsify(phi, cfg.epsilon, cfg.threshold_mode);
        for (double v : pruned.values) CHECK(std::abs(v) >= cfg.epsilon);
    }
}

TEST_CASE("filter statistics report density and spectral bound") {
    SyntheticDataset ds = make_house_dataset(1);
    auto bank = build_filters(
        lazy_diffusion(column_normalize(ds.graph.adjacency), 0.2), 3);
    auto stats = filter_statistics(bank);
    REQUIRE(stats.size() == 3);
    for (const auto& fs : stats) {
        CHECK(fs.density > 0.0);
        CHECK(fs.max_column_sum_drift < 1e-9);
        CHECK(fs.spectral_bound >= 0.0);
        CHECK(fs.spectral_bound < 2.0);
    }
    CHECK(stats[0].scale == 1);
    CHECK(stats[2].scale == 4);
}
