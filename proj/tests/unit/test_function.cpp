#include "fsvm/function.hpp"
#include "fsvm/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsvm;

namespace {

SampledFunction sample(const GridPtr& g, double (*f)(double))
{
    std::vector<double> v;
    for (double t : g->abscissae())
        v.push_back(f(t));
    return SampledFunction(g, v);
}

SampledFunction random_function(Rng& rng, const GridPtr& g)
{
    std::vector<double> v(g->size());
    for (auto& x : v)
        x = rng.normal();
    return SampledFunction(g, v);
}

double trapezoid_error(std::size_t n)
{
    auto g = SamplingGrid::uniform(0.0, 1.0, n);
    const auto u = sample(g, [](double t) { return std::exp(t); });
    std::vector<double> one(n, 1.0);
    return std::abs(inner_product(u, SampledFunction(g, one)) - (std::exp(1.0) - 1.0));
}

} // namespace

TEST_CASE("grid weights are trapezoidal")
{
    auto g = SamplingGrid::uniform(0.0, 1.0, 5);
    CHECK(g->weights()[0] == doctest::Approx(0.125));
    CHECK(g->weights()[2] == doctest::Approx(0.25));
    CHECK(g->total_mass() == doctest::Approx(1.0));
    CHECK(g->is_uniform());

    SamplingGrid uneven({0.0, 0.1, 0.5, 1.0});
    CHECK(uneven.weights()[1] == doctest::Approx(0.25));
    CHECK(uneven.total_mass() == doctest::Approx(1.0));
    CHECK_FALSE(uneven.is_uniform());
}

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS(SamplingGrid({0.0, 0.0, 1.0}), Error);
    CHECK_THROWS_AS(SamplingGrid({0.0, 1.0}, {1.0, -1.0}), Error);
    CHECK_THROWS_AS(SamplingGrid({0.0}), Error);
    auto g = SamplingGrid::uniform(0.0, 1.0, 4);
    CHECK_THROWS_AS(SampledFunction(g, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(SampledFunction(g, {1.0, 2.0, NAN, 3.0}), Error);
}

TEST_CASE("inner product examples")
{
    auto g = SamplingGrid::uniform(0.0, 1.0, 256);
    const auto one = sample(g, [](double) { return 1.0; });
    const auto s = sample(g, [](double t) { return std::sin(2 * M_PI * t); });
    const auto c = sample(g, [](double t) { return std::cos(2 * M_PI * t); });
    CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner_product(s, c)) < 1e-3);
    CHECK(inner_product(s, s) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(norm(s) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(norm(sample(g, [](double) { return 0.0; })) == 0.0);
    CHECK(norm(sample(g, [](double) { return -3.0; })) == doctest::Approx(3.0));
}

TEST_CASE("inner product is bilinear, symmetric and obeys Cauchy-Schwarz")
{
    Rng rng(11);
    auto g = std::make_shared<const SamplingGrid>(std::vector<double>{0.0, 0.05, 0.2, 0.21, 0.5, 0.8, 1.0});
    for (int trial = 0; trial < 50; ++trial) {
        const auto u = random_function(rng, g);
        const auto v = random_function(rng, g);
        const auto w = random_function(rng, g);
        const double a = rng.normal(), b = rng.normal();
        const double lhs = inner_product(combine(a, u, b, w), v);
        const double rhs = a * inner_product(u, v) + b * inner_product(w, v);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(a * inner_product(u, v)) + std::abs(b * inner_product(w, v)) + 1.0));
        CHECK(inner_product(u, v) == inner_product(v, u));
        CHECK(std::abs(inner_product(u, v)) <= norm(u) * norm(v) + 1e-12);
    }
}

TEST_CASE("trapezoid rule converges at second order")
{
    for (std::size_t n : {11, 21, 41, 81}) {
        const double ratio = trapezoid_error(n) / trapezoid_error(2 * n - 1);
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
    }
}

TEST_CASE("center")
{
    auto g = SamplingGrid::uniform(0.0, 1.0, 101);
    const auto five = center(sample(g, [](double) { return 5.0; }));
    for (double x : five.values())
        CHECK(std::abs(x) < 1e-12);
    const auto t = center(sample(g, [](double t) { return t; }));
    for (std::size_t k = 0; k < g->size(); ++k)
        CHECK(t[k] == doctest::Approx(g->abscissae()[k] - 0.5).epsilon(1e-12));

    Rng rng(3);
    const auto u = random_function(rng, g);
    const auto once = center(u);
    const auto twice = center(once);
    for (std::size_t k = 0; k < g->size(); ++k)
        CHECK(std::abs(once[k] - twice[k]) < 1e-10);
    CHECK(std::abs(mean(once)) < 1e-12);
}

TEST_CASE("normalize")
{
    Rng rng(5);
    auto g = SamplingGrid::uniform(-1.0, 2.0, 50);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_function(rng, g);
        const auto n1 = normalize(u);
        CHECK(norm(n1) == doctest::Approx(1.0).epsilon(1e-12));
        const auto n2 = normalize(n1);
        const double a = std::exp(rng.normal()), b = rng.normal();
        std::vector<double> affine(g->size());
        for (std::size_t k = 0; k < g->size(); ++k)
            affine[k] = a * u[k] + b;
        const auto n3 = normalize(SampledFunction(g, affine));
        for (std::size_t k = 0; k < g->size(); ++k) {
            CHECK(std::abs(n1[k] - n2[k]) < 1e-10);
            CHECK(std::abs(n1[k] - n3[k]) < 1e-10);
        }
    }
    const auto constant = sample(g, [](double) { return 2.0; });
    try {
        normalize(constant);
        FAIL("constant input accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
    }
    std::vector<SampledFunction> batch{random_function(rng, g), constant};
    try {
        normalize_all(batch);
        FAIL("constant input accepted");
    } catch (const Error& e) {
        REQUIRE(e.index().has_value());
        CHECK(*e.index() == 1);
    }
}

TEST_CASE("labeled dataset invariants")
{
    auto g = SamplingGrid::uniform(0.0, 1.0, 3);
    auto h = SamplingGrid::uniform(0.0, 2.0, 3);
    SampledFunction u(g, {1, 2, 3});
    SampledFunction v(h, {1, 2, 3});
    CHECK_THROWS_AS(LabeledDataset({u, u}, {1, 0}), Error);
    CHECK_THROWS_AS(LabeledDataset({u, u}, {1}), Error);
    CHECK_THROWS_AS(LabeledDataset({u, v}, {1, -1}), Error);
    LabeledDataset d({u, u, u}, {1, -1, 1});
    CHECK(d.count(1) == 2);
    const std::vector<std::size_t> idx{2, 1};
    const auto s = d.subset(idx);
    CHECK(s.labels() == std::vector<int>{1, -1});
}
