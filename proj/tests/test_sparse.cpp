#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wavebank/sparse.hpp"

using namespace wavebank;

namespace {

SparseMatrix random_sparse(std::size_t n, double density, std::mt19937_64& rng,
                           bool nonnegative = false) {
    std::vector<detail::Triplet> trips;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < density) {
                double v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
                if (nonnegative) v = std::abs(v);
                if (v != 0.0) trips.push_back({i, j, v});
            }
        }
    return detail::from_triplets(n, n, std::move(trips));
}

void check_csr_invariants(const SparseMatrix& m) {
    REQUIRE(m.row_offsets.size() == m.n_rows + 1);
    CHECK(m.row_offsets.back() == m.values.size());
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        CHECK(m.row_offsets[i] <= m.row_offsets[i + 1]);
        for (std::size_t p = m.row_offsets[i]; p + 1 < m.row_offsets[i + 1]; ++p)
            CHECK(m.col_indices[p] < m.col_indices[p + 1]);
        for (std::size_t p = m.row_offsets[i]; p < m.row_offsets[i + 1]; ++p)
            CHECK(m.col_indices[p] < m.n_cols);
    }
}

}  // namespace

TEST_CASE("identity round trip") {
    auto eye = sparse_identity(4);
    check_csr_invariants(eye);
    CHECK(eye.to_dense().isApprox(Mat::Identity(4, 4)));
}

TEST_CASE("column_normalize: 2-node edge graph") {
    Mat a(2, 2);
    a << 0, 1, 1, 0;
    auto s = column_normalize(from_dense(a));
    CHECK(s.to_dense().isApprox(a));  // unit degrees leave it unchanged
}

TEST_CASE("column_normalize: path graph degrees 1,2,1") {
    Mat a(3, 3);
    a << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    auto s = column_normalize(from_dense(a));
    // dense oracle A * D^{-1}
    Mat dinv = Mat::Zero(3, 3);
    dinv(0, 0) = 1.0;
    dinv(1, 1) = 0.5;
    dinv(2, 2) = 1.0;
    CHECK(s.to_dense().isApprox(a * dinv, 1e-15));
    CHECK(s.at(0, 1) == doctest::Approx(0.5));
    for (double cs : column_sums(s)) CHECK(cs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("column_normalize: isolated node becomes unit coordinate column") {
    std::vector<detail::Triplet> trips = {{0, 1, 1.0}, {1, 0, 1.0}};
    auto s = column_normalize(detail::from_triplets(3, 3, std::move(trips)));
    CHECK(s.at(2, 2) == 1.0);
    for (double cs : column_sums(s)) CHECK(cs == 1.0);
}

TEST_CASE("column_normalize: negative entry is a domain error") {
    Mat a(2, 2);
    a << 0, -1, 1, 0;
    CHECK_THROWS_AS(column_normalize(from_dense(a)), std::domain_error);
}

TEST_CASE("sparse_matmul: identity and idempotent cases") {
    std::mt19937_64 rng(7);
    auto b = random_sparse(20, 0.2, rng);
    auto ib = sparse_matmul(sparse_identity(20), b);
    CHECK(ib.to_dense().isApprox(b.to_dense()));

    Mat t(2, 2);
    t << 0.5, 0.5, 0.5, 0.5;
    auto tt = sparse_matmul(from_dense(t), from_dense(t));
    CHECK(tt.to_dense().isApprox(t, 1e-15));
}

TEST_CASE("sparse_matmul vs dense oracle on random matrices") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        std::size_t n = 50 + static_cast<std::size_t>(rng() % 51);
        auto a = random_sparse(n, 0.1, rng);
        auto b = random_sparse(n, 0.1, rng);
        auto c = sparse_matmul(a, b);
        check_csr_invariants(c);
        Mat oracle = a.to_dense() * b.to_dense();
        CHECK((c.to_dense() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sparse_matmul: dimension mismatch throws") {
    CHECK_THROWS_AS(sparse_matmul(sparse_identity(3), sparse_identity(4)),
                    std::invalid_argument);
}

TEST_CASE("spmm identity and row swap") {
    Mat x(2, 1);
    x << 1, 3;
    CHECK(spmm(sparse_identity(2), x).isApprox(x));

    Mat a(2, 2);
    a << 0, 1, 1, 0;
    Mat swapped = spmm(column_normalize(from_dense(a)), x);
    CHECK(swapped(0, 0) == 3.0);
    CHECK(swapped(1, 0) == 1.0);
}

TEST_CASE("spmm vs dense oracle") {
    std::mt19937_64 rng(3);
    auto s = random_sparse(30, 0.15, rng);
    Mat d(30, 7);
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d.data()[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    CHECK((spmm(s, d) - s.to_dense() * d).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((spmm_transpose(s, d) - s.to_dense().transpose() * d).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK_THROWS_AS(spmm(s, Mat::Zero(31, 2)), std::invalid_argument);
}

TEST_CASE("l1 column normalization handles signed columns") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 0.3;
    a(1, 0) = -0.1;
    a(1, 1) = 1.0;
    auto s = column_normalize_l1(from_dense(a));
    CHECK(s.at(0, 0) == doctest::Approx(0.75));
    CHECK(s.at(1, 0) == doctest::Approx(-0.25));
}
