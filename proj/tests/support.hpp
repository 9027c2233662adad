#pragma once

// Shared helpers for the test suite: independent finite-difference oracles,
// a random expression generator and small hand-built specs.

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "affinor/affinor.hpp"

namespace testing_support {

using affinor::Mat;
using affinor::Vec;

/// Richardson-extrapolated central difference of a scalar function.
inline double fd_partial(const std::function<double(const Vec&)>& f, const Vec& x, int i, double h = 1e-3) {
    auto central = [&](double s) {
        Vec p = x, m = x;
        p[i] += s;
        m[i] -= s;
        return (f(p) - f(m)) / (2.0 * s);
    };
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = fd_partial(f, x, static_cast<int>(i));
    return g;
}

/// Jacobian (rows: components) of a vector function by Richardson differences.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-3) {
    const Vec f0 = f(x);
    Mat J(f0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto central = [&](double s) {
            Vec p = x, m = x;
            p[i] += s;
            m[i] -= s;
            return Vec((f(p) - f(m)) / (2.0 * s));
        };
        J.col(i) = (4.0 * central(h / 2.0) - central(h)) / 3.0;
    }
    return J;
}

/// Random expressions in x1..x<arity>, built from wrappers that keep every
/// subexpression finite and smooth on [-1, 1]^arity.
class ExpressionGenerator {
public:
    ExpressionGenerator(int arity, std::uint64_t seed) : arity_(arity), rng_(seed) {}

    std::string operator()(int depth) {
        if (depth <= 0 || pick(4) == 0) return leaf();
        const std::string a = (*this)(depth - 1);
        switch (pick(14)) {
        case 0: return "sin(" + a + ")";
        case 1: return "cos(" + a + ")";
        case 2: return "exp(sin(" + a + "))";
        case 3: return "log(2 + sin(" + a + "))";
        case 4: return "sqrt(1 + (" + a + ")^2)";
        case 5: return "sinh(sin(" + a + "))";
        case 6: return "tan(0.5*sin(" + a + "))";
        case 7: return "-(" + a + ")";
        case 8: return "(" + a + ") + (" + (*this)(depth - 1) + ")";
        case 9: return "(" + a + ") - (" + (*this)(depth - 1) + ")";
        case 10: return "(" + a + ") * (" + (*this)(depth - 1) + ")";
        case 11: return "(" + a + ") / (2 + cos(" + (*this)(depth - 1) + "))";
        case 12: return "sin(" + a + ")^" + std::to_string(2 + pick(2));
        default: return "cosh(cos(" + a + "))";
        }
    }

    Vec point() {
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        Vec x(arity_);
        for (int i = 0; i < arity_; ++i) x[i] = d(rng_);
        return x;
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string leaf() {
        if (pick(3) == 0) {
            std::uniform_real_distribution<double> d(-1.5, 1.5);
            return "(" + affinor::format_real(std::round(d(rng_) * 100.0) / 100.0) + ")";
        }
        return "x" + std::to_string(1 + pick(arity_));
    }

    int arity_;
    std::mt19937_64 rng_;
};

/// Round-sphere chart metric diag(1, sin^2 x1) with F = 0, on x1 in [0.3, pi - 0.3].
inline affinor::ManifoldSpec sphere_chart() {
    affinor::ManifoldSpec M;
    M.name = "sphere_chart";
    M.dim = 2;
    M.mu = 1;
    M.metric = {affinor::parse("1", 2), affinor::parse("0", 2), affinor::parse("0", 2), affinor::parse("sin(x1)^2", 2)};
    M.affinor = {affinor::parse("0", 2), affinor::parse("0", 2), affinor::parse("0", 2), affinor::parse("0", 2)};
    M.domain = {{0.3, 3.14159265358979 - 0.3}, {-1.0, 1.0}};
    return M;
}

/// A constant-coefficient manifold on R^m with g = I.
inline affinor::ManifoldSpec euclidean(int m, int mu, const std::vector<std::string>& affinor_entries) {
    affinor::ManifoldSpec M;
    M.name = "euclidean";
    M.dim = m;
    M.mu = mu;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M.metric.push_back(affinor::parse(i == j ? "1" : "0", static_cast<std::size_t>(m)));
    for (const auto& s : affinor_entries) M.affinor.push_back(affinor::parse(s, static_cast<std::size_t>(m)));
    M.domain = affinor::Domain(static_cast<std::size_t>(m), affinor::Interval{-1.0, 1.0});
    return M;
}

inline affinor::SubmanifoldSpec submanifold_of(std::shared_ptr<const affinor::ManifoldSpec> ambient, int n,
                                               const std::vector<std::string>& embedding, affinor::Domain domain) {
    affinor::SubmanifoldSpec S;
    S.name = "test_sub";
    S.dim = n;
    S.ambient = std::move(ambient);
    for (const auto& e : embedding) S.embedding.push_back(affinor::parse(e, static_cast<std::size_t>(n), 'u'));
    S.domain = std::move(domain);
    return S;
}

inline const affinor::SubmanifoldSpec& fixture_sub(const std::string& name) {
    return *affinor::get_fixture(name).submanifold;
}

inline const affinor::ManifoldSpec& fixture_manifold(const std::string& name) {
    return *affinor::get_fixture(name).manifold;
}

/// Largest absolute entry; 0 for an empty matrix.
inline double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
}

}  // namespace testing_support
