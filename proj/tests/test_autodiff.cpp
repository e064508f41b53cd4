#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <limits>
#include <random>

#include "wavebank/autodiff.hpp"

using namespace wavebank;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            double v = scale * (2.0 * u - 1.0);
            if (std::abs(v) < 1e-3) v += 0.01;  // keep clear of the PReLU kink
            m(i, j) = v;
        }
    return m;
}

}  // namespace

TEST_CASE("forward values of the primitive set") {
    Tape tape;
    auto slope = make_scalar(0.25);
    Mat xv(1, 2);
    xv << -2.0, 3.0;
    auto x = make_leaf(xv);
    auto y = tape.prelu(x, slope);
    CHECK(y->value(0, 0) == doctest::Approx(-0.5));
    CHECK(y->value(0, 1) == doctest::Approx(3.0));

    auto s = tape.sigmoid(make_scalar(0.0));
    CHECK(s->value(0, 0) == doctest::Approx(0.5));

    auto id = tape.spmm_const(sparse_identity(1), make_leaf(Mat::Ones(1, 2)));
    CHECK(id->value.isApprox(Mat::Ones(1, 2)));
}

TEST_CASE("backward: mean of all entries gives uniform gradient") {
    Tape tape;
    auto x = make_leaf(Mat::Random(3, 4), true);
    auto loss = tape.row_mean(tape.transpose(tape.row_mean(x)));
    tape.backward(loss);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            CHECK(x->grad(i, j) == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("backward: sigmoid at zero has slope 1/4") {
    Tape tape;
    auto w = make_scalar(0.0, true);
    auto c = make_scalar(3.0);
    auto loss = tape.matmul(tape.sigmoid(w), c);
    tape.backward(loss);
    CHECK(w->grad(0, 0) == doctest::Approx(0.25 * 3.0));
}

TEST_CASE("backward contract errors") {
    Tape tape;
    auto x = make_leaf(Mat::Ones(2, 2), true);
    auto y = tape.scale(x, 2.0);
    CHECK_THROWS_AS(tape.backward(y), std::logic_error);  // not scalar
    Tape tape2;
    auto z = tape2.row_mean(tape2.transpose(tape2.row_mean(x)));
    tape2.backward(z);
    CHECK_THROWS_AS(tape2.backward(z), std::logic_error);  // consumed
}

TEST_CASE("each primitive passes grad_check in isolation") {
    std::mt19937_64 rng(2024);
    auto a = make_leaf(random_mat(3, 4, rng), true);
    auto b = make_leaf(random_mat(4, 2, rng), true);
    auto bias = make_leaf(random_mat(1, 4, rng), true);
    auto slope = make_scalar(0.25, true);
    std::mt19937_64 srng(5);
    SparseMatrix s = from_dense(random_mat(3, 3, srng));

    auto scalarize = [](Tape& t, const TensorPtr& x) {
        return t.row_mean(t.transpose(t.row_mean(x)));
    };

    struct Case {
        const char* name;
        std::function<TensorPtr(Tape&)> fwd;
        std::vector<TensorPtr> params;
    };
    std::vector<Case> cases = {
        {"matmul", [&](Tape& t) { return scalarize(t, t.matmul(a, b)); }, {a, b}},
        {"spmm_const", [&](Tape& t) { return scalarize(t, t.spmm_const(s, a)); }, {a}},
        {"add_bias", [&](Tape& t) { return scalarize(t, t.add_bias(a, bias)); }, {a, bias}},
        {"prelu", [&](Tape& t) { return scalarize(t, t.prelu(a, slope)); }, {a, slope}},
        {"sigmoid", [&](Tape& t) { return scalarize(t, t.sigmoid(a)); }, {a}},
        {"row_mean", [&](Tape& t) { return t.row_mean(t.transpose(t.row_mean(a))); }, {a}},
        {"bce", [&](Tape& t) { return t.bce_logits_sum(a, 1.0); }, {a}},
    };
    for (auto& c : cases) {
        CAPTURE(c.name);
        auto loss_fn = [&]() {
            for (auto& p : c.params) p->zero_grad();
            Tape t;
            auto loss = c.fwd(t);
            double v = loss->value(0, 0);
            t.backward(loss);
            return v;
        };
        CHECK(grad_check(loss_fn, c.params) < 1e-7);
    }
}

TEST_CASE("grad_check sanity: w^2 at w=3 and a constant function") {
    auto w = make_scalar(3.0, true);
    auto loss_fn = [&]() {
        w->zero_grad();
        Tape t;
        auto loss = t.matmul(w, w);
        double v = loss->value(0, 0);
        t.backward(loss);
        return v;
    };
    CHECK(grad_check(loss_fn, {w}) < 1e-8);
    CHECK(w->grad(0, 0) == doctest::Approx(6.0).epsilon(1e-9));

    auto c = make_scalar(1.0, true);
    auto const_fn = [&]() {
        c->zero_grad();
        Tape t;
        auto loss = t.scale(make_scalar(5.0), 1.0);
        t.backward(loss);
        return 5.0;
    };
    CHECK(grad_check(const_fn, {c}) == 0.0);
}

TEST_CASE("backward of a sum equals the sum of backwards") {
    std::mt19937_64 rng(77);
    auto x = make_leaf(random_mat(4, 3, rng), true);
    auto slope = make_scalar(0.25, true);

    auto term1 = [&](Tape& t) { return t.bce_logits_sum(t.prelu(x, slope), 1.0); };
    auto term2 = [&](Tape& t) { return t.bce_logits_sum(t.scale(x, 0.5), 0.0); };

    x->zero_grad();
    slope->zero_grad();
    {
        Tape t;
        auto loss = t.add(term1(t), term2(t));
        t.backward(loss);
    }
    Mat joint_x = x->grad, joint_s = slope->grad;

    x->zero_grad();
    slope->zero_grad();
    {
        Tape t;
        auto loss = term1(t);
        t.backward(loss);
    }
    {
        Tape t;
        auto loss = term2(t);
        t.backward(loss);
    }
    CHECK((x->grad - joint_x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((slope->grad - joint_s).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    auto p = make_leaf(Mat::Ones(2, 2), true);
    std::vector<TensorPtr> params = {p};
    AdamState st(params, 0.001);
    p->zero_grad();
    adam_step(params, st);
    CHECK(p->value.isApprox(Mat::Ones(2, 2)));
    CHECK(st.step == 1);
}

TEST_CASE("adam: first step with unit gradient moves by about lr") {
    auto p = make_leaf(Mat::Zero(2, 2), true);
    std::vector<TensorPtr> params = {p};
    AdamState st(params, 0.001);
    p->grad = Mat::Ones(2, 2);
    adam_step(params, st);
    // bias-corrected first step: lr * 1 / (1 + eps') with eps' tiny
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(p->value.data()[i] == doctest::Approx(-0.001).epsilon(1e-4));
}

TEST_CASE("adam: identical runs are bit-identical") {
    auto run = []() {
        auto p = make_leaf(Mat::Constant(2, 2, 0.5), true);
        std::vector<TensorPtr> params = {p};
        AdamState st(params, 0.01);
        for (int i = 0; i < 10; ++i) {
            p->grad = 0.3 * p->value;
            adam_step(params, st);
        }
        return p->value;
    };
    CHECK(run() == run());
}

TEST_CASE("adam aborts on non-finite gradients") {
    auto p = make_leaf(Mat::Zero(1, 1), true);
    std::vector<TensorPtr> params = {p};
    AdamState st(params);
    p->grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(params, st), std::runtime_error);
}
