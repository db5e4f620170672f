// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "ftns/errors.hpp"
#include "ftns/plant.hpp"

#include <doctest.h>

using namespace ftns;
using ftns::testing::vec;

namespace {

// 30 x1^2 + 25 x1 x2 + 15 x2^2 - 110 x1 - 85 x2 + 141
CostModel expanded_reference()
{
    return CostModel::polynomial(2, {{30, {2, 0}},
                                     {25, {1, 1}},
                                     {15, {0, 2}},
                                     {-110, {1, 0}},
                                     {-85, {0, 1}},
                                     {141, {0, 0}}});
}

// Non-quadratic map whose Hessian varies with x.
CostModel quartic()
{
    return CostModel::polynomial(3, {{1.5, {4, 0, 0}},
                                     {-0.7, {1, 3, 0}},
                                     {2.0, {0, 2, 1}},
                                     {0.3, {1, 1, 1}},
                                     {4.0, {0, 0, 2}},
                                     {-1.0, {1, 0, 0}}});
}

Eigen::VectorXd fd_grad(const CostModel& m, const Eigen::VectorXd& x, double h)
{
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd p = x, q = x;
        p[i] += h;
        q[i] -= h;
        g[i] = (m.eval(p) - m.eval(q)) / (2 * h);
    }
    return g;
}

Eigen::MatrixXd fd_hess(const CostModel& m, const Eigen::VectorXd& x, double h)
{
    const Eigen::Index n = x.size();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto at = [&](double si, double sj) {
                Eigen::VectorXd p = x;
                p[i] += si * h;
                p[j] += sj * h;
                return m.eval(p);
            };
            out(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("plant") {

TEST_CASE("reference map values")
{
    const CostModel m = ftns::testing::ref_model();
    CHECK(m.dim() == 2);
    CHECK(m.is_quadratic());
    CHECK(eval_cost(m, vec({1, 2})) == 1.0);
    CHECK(eval_cost(m, vec({0, 1})) == 71.0);
    CHECK(eval_cost(CostModel::polynomial(3, {}), vec({1, -2, 3})) == 0.0);
    CHECK(m.ystar() == 1.0);
    CHECK(m.xstar() == vec({1, 2}));
}

TEST_CASE("reference gradient and Hessian")
{
    const CostModel m = ftns::testing::ref_model();
    CHECK(grad_oracle(m, vec({0, 1})) == vec({-85, -55}));
    CHECK(grad_oracle(m, m.xstar()).norm() == 0.0);
    Eigen::MatrixXd h(2, 2);
    h << 60, 25, 25, 30;
    CHECK(hess_oracle(m, vec({0, 1})) == h);
    CHECK(hess_oracle(m, vec({-3, 7})) == h);

    const Spectrum sp = spectrum(h);
    // Roots of l^2 - 90 l + 1175: 45 -+ sqrt(850) = 15.8452, 74.1548.
    CHECK(sp.lambda_min == doctest::Approx(45 - std::sqrt(850.0)).epsilon(1e-14));
    CHECK(sp.lambda_max == doctest::Approx(45 + std::sqrt(850.0)).epsilon(1e-14));
    CHECK(sp.lambda_min + sp.lambda_max == doctest::Approx(90.0).epsilon(1e-14));
    CHECK(sp.lambda_min * sp.lambda_max == doctest::Approx(1175.0).epsilon(1e-13));

    const CostModel id = CostModel::quadratic(Eigen::MatrixXd::Identity(3, 3), vec({0, 0, 0}), 0);
    CHECK(hess_oracle(id, vec({1, 2, 3})) == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("quadratic form reproduces the expanded polynomial on a 5x5 grid")
{
    const CostModel q = ftns::testing::ref_model();
    const CostModel p = expanded_reference();
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const Eigen::VectorXd x = vec({-2.0 + 1.5 * i, -1.0 + 1.75 * j});
            CHECK(ftns::testing::rel_err(q.eval(x), p.eval(x)) <= 1e-12);
            CHECK((q.grad(x) - p.grad(x)).norm() <= 1e-12 * std::max(1.0, q.grad(x).norm()));
            CHECK((q.hess(x) - p.hess(x)).norm() <= 1e-12 * q.hess(x).norm());
        }
    }
}

TEST_CASE("property: oracles agree with central differences")
{
    std::mt19937_64 rng(31);
    for (const CostModel& m : {ftns::testing::ref_model(), expanded_reference(), quartic()}) {
        for (int trial = 0; trial < 25; ++trial) {
            const Eigen::VectorXd x = ftns::testing::uniform(rng, m.dim(), -5, 5);
            const Eigen::VectorXd g = m.grad(x);
            const Eigen::MatrixXd h = m.hess(x);
            CHECK((fd_grad(m, x, 1e-6) - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
            CHECK((fd_hess(m, x, 1e-4) - h).norm() <= 1e-5 * std::max(1.0, h.norm()));
        }
    }
}

TEST_CASE("quadratic models require a symmetric positive definite Hessian")
{
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(CostModel::quadratic(bad, vec({0, 0}), 0), ParameterError);
    bad << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(CostModel::quadratic(bad, vec({0, 0}), 0), ShapeError);
    CHECK_THROWS_AS(CostModel::quadratic(Eigen::MatrixXd::Identity(3, 3), vec({0, 0}), 0),
                    ShapeError);
}

TEST_CASE("dimension mismatches and missing oracles are reported")
{
    const CostModel m = ftns::testing::ref_model();
    CHECK_THROWS_AS(m.eval(vec({1, 2, 3})), ShapeError);
    CHECK_THROWS_AS(CostModel::polynomial(2, {{1.0, {1, 0, 0}}}), ShapeError);
    CHECK_THROWS_AS(CostModel::polynomial(2, {{1.0, {-1, 0}}}), ParameterError);

    const CostModel bb = CostModel::black_box(2, [](const Eigen::Ref<const Eigen::VectorXd>& x) {
        return x.squaredNorm();
    });
    CHECK(bb.eval(vec({3, 4})) == 25.0);
    CHECK_FALSE(bb.has_oracles());
    CHECK_THROWS_AS(bb.grad(vec({0, 0})), UnsupportedError);
    CHECK_THROWS_AS(bb.hess(vec({0, 0})), UnsupportedError);
    CHECK_THROWS_AS(bb.quadratic_map(), UnsupportedError);
    CHECK_THROWS_AS(expanded_reference().hstar(), UnsupportedError);
}

TEST_CASE("convexity warnings on non-convex polynomials")
{
    const CostModel saddle = CostModel::polynomial(2, {{1.0, {2, 0}}, {-1.0, {0, 2}}});
    const auto w = convexity_warnings(saddle, {vec({0, 0}), vec({1, 1})});
    CHECK(w.size() == 2);
    CHECK(convexity_warnings(expanded_reference(), {vec({0, 0}), vec({5, -5})}).empty());
}

}  // TEST_SUITE
