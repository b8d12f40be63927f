#pragma once

// Reference implementations used only by the tests. They favour obviousness
// over speed and share no code with the library beyond plain data types.

#include "fsvm/function.hpp"
#include "fsvm/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

struct QpOptimum {
    std::vector<double> alphas;
    double objective = -std::numeric_limits<double>::infinity();
};

inline double dual_value(const Eigen::MatrixXd& K, const std::vector<int>& y, const std::vector<double>& a)
{
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j)
            quad += a[i] * a[j] * y[i] * y[j] * K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return lin - 0.5 * quad;
}

/// Exhaustive active-set search: every assignment of each alpha to {0, C, free}
/// is solved as an equality-constrained QP; the best feasible stationary point
/// is the global maximum of the (concave) dual. Requires a nonsingular Gram.
inline QpOptimum exhaustive_dual(const Eigen::MatrixXd& K, const std::vector<int>& y, double C)
{
    const int n = static_cast<int>(y.size());
    QpOptimum best;
    int patterns = 1;
    for (int i = 0; i < n; ++i)
        patterns *= 3;
    for (int p = 0; p < patterns; ++p) {
        std::vector<int> state(n);
        for (int i = 0, q = p; i < n; ++i, q /= 3)
            state[i] = q % 3; // 0: zero, 1: at C, 2: free
        std::vector<int> free;
        for (int i = 0; i < n; ++i)
            if (state[i] == 2)
                free.push_back(i);
        std::vector<double> a(n, 0.0);
        for (int i = 0; i < n; ++i)
            if (state[i] == 1)
                a[i] = C;
        const int f = static_cast<int>(free.size());
        if (f > 0) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            double fixed_sum = 0.0;
            for (int i = 0; i < n; ++i)
                fixed_sum += y[i] * a[i];
            for (int r = 0; r < f; ++r) {
                const int i = free[r];
                double s = 1.0;
                for (int j = 0; j < n; ++j)
                    if (state[j] == 1)
                        s -= y[i] * y[j] * K(i, j) * C;
                rhs(r) = s;
                for (int c = 0; c < f; ++c)
                    A(r, c) = y[i] * y[free[c]] * K(i, free[c]);
                A(r, f) = y[i];
                A(f, r) = y[i];
            }
            rhs(f) = -fixed_sum;
            const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
            if ((A * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm()))
                continue;
            for (int r = 0; r < f; ++r)
                a[free[r]] = sol(r);
        }
        double eq = 0.0;
        bool feasible = true;
        for (int i = 0; i < n; ++i) {
            eq += y[i] * a[i];
            if (a[i] < -1e-10 || a[i] > C + 1e-10)
                feasible = false;
        }
        if (!feasible || std::abs(eq) > 1e-9 * (1.0 + C))
            continue;
        const double v = dual_value(K, y, a);
        if (v > best.objective) {
            best.objective = v;
            best.alphas = a;
        }
    }
    return best;
}

/// Random curves on a uniform grid, labels balanced by construction.
inline fsvm::LabeledDataset random_problem(fsvm::Rng& rng, std::size_t n, std::size_t points)
{
    auto grid = fsvm::SamplingGrid::uniform(0.0, 1.0, points);
    std::vector<fsvm::SampledFunction> fs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : -1;
        std::vector<double> v(points);
        for (std::size_t k = 0; k < points; ++k)
            v[k] = 0.6 * y * std::sin(3.0 * static_cast<double>(k) / static_cast<double>(points)) + rng.normal();
        fs.emplace_back(grid, std::move(v));
        labels.push_back(y);
    }
    return fsvm::LabeledDataset(std::move(fs), std::move(labels));
}

/// Plain O(n^2) DFT coefficients of a uniformly sampled curve against the
/// trapezoid-weighted Fourier system, computed straight from the definition.
inline std::vector<double> fourier_by_definition(const fsvm::SampledFunction& u, int d)
{
    const auto& t = u.grid()->abscissae();
    const auto& w = u.grid()->weights();
    const double a = u.grid()->start();
    const double L = u.grid()->length();
    std::vector<double> c(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double s = (t[k] - a) / L;
            double psi = 1.0 / std::sqrt(L);
            if (j > 0) {
                const int freq = (j + 1) / 2;
                psi = std::sqrt(2.0 / L) * (j % 2 == 1 ? std::cos(2 * M_PI * freq * s) : std::sin(2 * M_PI * freq * s));
            }
            c[static_cast<std::size_t>(j)] += w[k] * u[k] * psi;
        }
    }
    return c;
}

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("fsvm_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace oracle
