#include "fsvm/solver.hpp"
#include "fsvm/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace fsvm;

namespace {

struct Points {
    Eigen::MatrixXd X; // one row per point
    std::vector<int> y;
    Eigen::MatrixXd gram() const { return X * X.transpose(); }
};

Points random_points(Rng& rng, int n, int dim, double shift)
{
    Points p;
    p.X.resize(n, dim);
    for (int i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : -1;
        p.y.push_back(y);
        for (int k = 0; k < dim; ++k)
            p.X(i, k) = rng.normal() + (k == 0 ? shift * y : 0.0);
    }
    return p;
}

double regularized_risk(const Points& p, const Eigen::VectorXd& w, double b, double lambda)
{
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < p.X.rows(); ++i)
        hinge += std::max(0.0, 1.0 - p.y[static_cast<std::size_t>(i)] * (p.X.row(i).dot(w) + b));
    return lambda * w.squaredNorm() + hinge / static_cast<double>(p.X.rows());
}

SvmModel two_point_model(double C = 10.0)
{
    auto g = SamplingGrid::uniform(0.0, 1.0, 2);
    // Constant curves c on [0, 1] have L2 inner product c * c'.
    const LabeledDataset data({SampledFunction(g, {1.0, 1.0}), SampledFunction(g, {-1.0, -1.0})}, {1, -1});
    return train(FunctionalKernel{}, data, C).model;
}

} // namespace

TEST_CASE("two-point analytic solution")
{
    Eigen::MatrixXd K(2, 2);
    K << 1, -1, -1, 1;
    const std::vector<int> y{1, -1};
    const auto s = solve_dual(K, y, 10.0);
    CHECK(std::abs(s.alphas[0] - 0.5) < 1e-8);
    CHECK(std::abs(s.alphas[1] - 0.5) < 1e-8);
    CHECK(std::abs(s.bias) < 1e-8);

    const SvmModel m = two_point_model();
    auto g = m.grid();
    for (double x : {-2.0, -0.3, 0.0, 0.7, 5.0})
        CHECK(m.decision_value(SampledFunction(g, {x, x})) == doctest::Approx(x).epsilon(1e-8));
    CHECK(std::abs(m.decision_value(SampledFunction(g, {0.0, 0.0}))) < 1e-8);
}

TEST_CASE("solver matches the exhaustive active-set oracle")
{
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + trial % 5;
        const Points p = random_points(rng, n, 10, 0.5);
        const Eigen::MatrixXd K = trial % 2 == 0 ? p.gram() : [&] {
            Eigen::MatrixXd G(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    G(i, j) = std::exp(-0.2 * (p.X.row(i) - p.X.row(j)).squaredNorm());
            return G;
        }();
        for (double C : {0.1, 1.0, 10.0}) {
            const auto s = solve_dual(K, p.y, C);
            const auto ref = oracle::exhaustive_dual(K, p.y, C);
            REQUIRE(std::isfinite(ref.objective));
            CHECK(std::abs(s.objective - ref.objective) <= 1e-4 * std::abs(ref.objective));
            CHECK(s.kkt_violation <= 1e-3);
            double eq = 0.0;
            for (int i = 0; i < n; ++i) {
                CHECK(s.alphas[static_cast<std::size_t>(i)] >= 0.0);
                CHECK(s.alphas[static_cast<std::size_t>(i)] <= C);
                eq += s.alphas[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
            }
            CHECK(std::abs(eq) <= 1e-10 * C * n);
        }
    }
}

TEST_CASE("strong duality at convergence")
{
    Rng rng(5);
    SolverOptions tight;
    tight.tolerance = 1e-8;
    for (int trial = 0; trial < 10; ++trial) {
        const Points p = random_points(rng, 12, 3, 1.0);
        const Eigen::MatrixXd K = p.gram();
        for (double C : {0.1, 1.0, 10.0}) {
            const auto s = solve_dual(K, p.y, C, tight);
            const double primal = primal_objective(K, p.y, s.alphas, s.bias, C);
            CHECK(s.objective <= primal * (1 + 1e-6) + 1e-12);
            CHECK(primal - s.objective <= 1e-6 * std::max(1.0, std::abs(primal)));
        }
    }
}

TEST_CASE("the primal solution minimises the regularized hinge risk")
{
    Rng rng(17);
    SolverOptions tight;
    tight.tolerance = 1e-9;
    const Points p = random_points(rng, 30, 3, 0.8);
    const double C = 2.0;
    const auto s = solve_dual(p.gram(), p.y, C, tight);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
    for (Eigen::Index i = 0; i < p.X.rows(); ++i)
        w += s.alphas[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)] * p.X.row(i).transpose();
    const double lambda = 1.0 / (2.0 * C * static_cast<double>(p.X.rows()));
    const double at_solution = regularized_risk(p, w, s.bias, lambda);
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd dw(3);
        for (int j = 0; j < 3; ++j)
            dw(j) = rng.normal();
        const double db = rng.normal();
        for (double eps : {1e-1, 1e-2, 1e-3})
            CHECK(regularized_risk(p, w + eps * dw, s.bias + eps * db, lambda) >= at_solution - 1e-7);
    }
}

TEST_CASE("permuting the training set permutes the multipliers")
{
    Rng rng(23);
    const Points p = random_points(rng, 15, 4, 0.7);
    const Eigen::MatrixXd K = p.gram();
    SolverOptions tight;
    tight.tolerance = 1e-9;
    const auto s = solve_dual(K, p.y, 1.0, tight);
    std::vector<std::size_t> perm(15);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    Eigen::MatrixXd Kp(15, 15);
    std::vector<int> yp(15);
    for (std::size_t i = 0; i < 15; ++i) {
        yp[i] = p.y[perm[i]];
        for (std::size_t j = 0; j < 15; ++j)
            Kp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                K(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
    }
    const auto sp = solve_dual(Kp, yp, 1.0, tight);
    for (std::size_t i = 0; i < 15; ++i)
        CHECK(std::abs(sp.alphas[i] - s.alphas[perm[i]]) < 1e-6);
    CHECK(std::abs(sp.bias - s.bias) < 1e-6);
}

TEST_CASE("training error is nonincreasing in C on separable data")
{
    Rng rng(31);
    auto g = SamplingGrid::uniform(0.0, 1.0, 32);
    std::vector<SampledFunction> fs;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const int y = i % 2 == 0 ? 1 : -1;
        std::vector<double> v(32);
        for (std::size_t k = 0; k < 32; ++k)
            v[k] = 0.4 * y + 0.3 * rng.normal();
        fs.emplace_back(g, v);
        labels.push_back(y);
    }
    const LabeledDataset data(fs, labels);
    double previous = 1.0;
    for (double C : {0.001, 0.01, 0.1, 1.0, 10.0, 100.0}) {
        const auto r = train(FunctionalKernel{{}, std::nullopt, BaseKernelSpec::gaussian(0.5)}, data, C);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < data.size(); ++i)
            wrong += r.model.predict(data.function(i)) != data.label(i);
        const double err = static_cast<double>(wrong) / static_cast<double>(data.size());
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
    CHECK(previous == 0.0);
}

TEST_CASE("free support vectors sit on the margin")
{
    Rng rng(41);
    const auto data = oracle::random_problem(rng, 20, 16);
    SolverOptions tight;
    tight.tolerance = 1e-8;
    const auto r = train(FunctionalKernel{{}, std::nullopt, BaseKernelSpec::gaussian(0.3)}, data, 1.0, tight);
    const Embedder e(r.model.kernel(), data.grid());
    int free = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double a = r.solution.alphas[i];
        if (a > 1e-6 && a < 1.0 - 1e-6) {
            ++free;
            CHECK(data.label(i) * r.model.decision_value(data.function(i)) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    CHECK(free > 0);
}

TEST_CASE("degenerate and pathological inputs")
{
    Eigen::MatrixXd K(2, 2);
    K << 1, -1, -1, 1;
    const std::vector<int> y{1, -1};
    const auto tiny = solve_dual(K, y, 1e-9);
    for (double a : tiny.alphas)
        CHECK(a <= 1e-9);

    auto g = SamplingGrid::uniform(0.0, 1.0, 2);
    const SvmModel constant(FunctionalKernel{}, g, {}, {}, {}, -0.25, ModelMetadata{1.0, 0, 0});
    CHECK(constant.decision_value(SampledFunction(g, {3.0, 1.0})) == -0.25);
    CHECK(constant.predict(SampledFunction(g, {3.0, 1.0})) == -1);
    CHECK(SvmModel::sign_label(0.0) == 1);
    CHECK(SvmModel::sign_label(1e-300) == 1);
    CHECK(SvmModel::sign_label(-1e-300) == -1);

    CHECK_THROWS_AS(solve_dual(K, std::vector<int>{1, 1}, 1.0), Error);
    CHECK_THROWS_AS(solve_dual(K, y, 0.0), Error);
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1, 3, 3, 1;
    CHECK_THROWS_AS(solve_dual(indefinite, y, 1.0), Error);

    Rng rng(3);
    const Points p = random_points(rng, 40, 5, 0.1);
    SolverOptions capped;
    capped.max_iterations = 2;
    try {
        solve_dual(p.gram(), p.y, 100.0, capped);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.kind() == ErrorKind::convergence);
        CHECK(e.best_iterate().alphas.size() == 40);
    }
}
