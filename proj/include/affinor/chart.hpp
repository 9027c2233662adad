#pragma once

// Pointwise tensor calculus on one global chart of the ambient manifold.
//
// Index conventions, used everywhere in the library:
//   metric    g_ij        lower indices, stored row-major
//   affinor   F^i_j       (F X)^i = F^i_j X^j, row index is the upper index
//   Gamma^k_ij            Christoffel symbols of the Levi-Civita connection

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "affinor/expr.hpp"
#include "affinor/linalg.hpp"
#include "affinor/report.hpp"
#include "affinor/sampling.hpp"

namespace affinor {

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// A (g, F, mu)-structure on a single chart.
struct ManifoldSpec {
    std::string name;
    int dim = 0;
    int mu = 1;
    std::vector<Expression> metric;   // dim*dim, g_ij at [i*dim + j]
    std::vector<Expression> affinor;  // dim*dim, F^i_j at [i*dim + j]
    Domain domain;

    const Expression& g(int i, int j) const { return metric[static_cast<std::size_t>(i * dim + j)]; }
    const Expression& F(int i, int j) const { return affinor[static_cast<std::size_t>(i * dim + j)]; }
};

/// Rank-3 array with dense storage, indexed (a, b, c).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

    int size() const { return n_; }
    double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
    double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t index(int a, int b, int c) const { return static_cast<std::size_t>((a * n_ + b) * n_ + c); }
    int n_ = 0;
    std::vector<double> data_;
};

/// A vector field on an open subset of R^d with c components. Expression
/// backed fields are differentiated exactly with jets; procedural fields with
/// central finite differences.
class VectorField {
public:
    using Eval = std::function<Vec(const Vec&)>;
    using Jacobian = std::function<Mat(const Vec&)>;

    static VectorField from_expressions(std::vector<Expression> components) {
        const int d = components.empty() ? 0 : static_cast<int>(components.front().arity());
        const int c = static_cast<int>(components.size());
        auto comps = std::make_shared<const std::vector<Expression>>(std::move(components));
        VectorField f;
        f.domain_dim_ = d;
        f.components_ = c;
        f.exact_ = true;
        f.eval_ = [comps](const Vec& x) {
            Vec v(static_cast<Eigen::Index>(comps->size()));
            for (std::size_t i = 0; i < comps->size(); ++i) v[static_cast<Eigen::Index>(i)] = evaluate((*comps)[i], x);
            return v;
        };
        f.jac_ = [comps, d](const Vec& x) {
            Mat j(static_cast<Eigen::Index>(comps->size()), d);
            for (std::size_t i = 0; i < comps->size(); ++i)
                j.row(static_cast<Eigen::Index>(i)) = evaluate_jet((*comps)[i], x, 1).gradient.transpose();
            return j;
        };
        return f;
    }

    static VectorField procedural(int domain_dim, int components, Eval eval, double step = kFiniteDifferenceStep) {
        VectorField f;
        f.domain_dim_ = domain_dim;
        f.components_ = components;
        f.exact_ = false;
        f.eval_ = std::move(eval);
        f.jac_ = [e = f.eval_, domain_dim, components, step](const Vec& x) {
            Mat j(components, domain_dim);
            Vec xp = x;
            for (int i = 0; i < domain_dim; ++i) {
                xp[i] = x[i] + step;
                Vec plus = e(xp);
                xp[i] = x[i] - step;
                Vec minus = e(xp);
                xp[i] = x[i];
                j.col(i) = (plus - minus) / (2.0 * step);
            }
            return j;
        };
        return f;
    }

    static VectorField constant(Vec value, int domain_dim) {
        VectorField f;
        f.domain_dim_ = domain_dim;
        f.components_ = static_cast<int>(value.size());
        f.exact_ = true;
        f.eval_ = [value](const Vec&) { return value; };
        f.jac_ = [c = f.components_, domain_dim](const Vec&) { return Mat::Zero(c, domain_dim); };
        return f;
    }

    int domain_dim() const { return domain_dim_; }
    int components() const { return components_; }
    bool exact() const { return exact_; }

    Vec operator()(const Vec& x) const { return eval_(x); }
    /// components x domain_dim matrix of partial derivatives.
    Mat jacobian(const Vec& x) const { return jac_(x); }

private:
    int domain_dim_ = 0;
    int components_ = 0;
    bool exact_ = false;
    Eval eval_;
    Jacobian jac_;
};

inline Mat evaluate_matrix(const std::vector<Expression>& entries, int m, const Vec& x) {
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = evaluate(entries[static_cast<std::size_t>(i * m + j)], x);
    return a;
}

/// Value and first partials of a matrix of expressions; d[k](i, j) = d_k A_ij.
struct MatrixJet {
    Mat value;
    std::vector<Mat> d;
};

inline MatrixJet evaluate_matrix_jet(const std::vector<Expression>& entries, int m, const Vec& x) {
    MatrixJet out{Mat(m, m), std::vector<Mat>(static_cast<std::size_t>(m), Mat(m, m))};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const Expression& e = entries[static_cast<std::size_t>(i * m + j)];
            if (e.is_constant()) {
                out.value(i, j) = evaluate(e, x);
                for (int k = 0; k < m; ++k) out.d[static_cast<std::size_t>(k)](i, j) = 0.0;
                continue;
            }
            Jet2 jet = evaluate_jet(e, x, 1);
            out.value(i, j) = jet.value;
            for (int k = 0; k < m; ++k) out.d[static_cast<std::size_t>(k)](i, j) = jet.gradient[k];
        }
    return out;
}

inline void require_positive_definite(const Mat& g, const Vec& x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues().size() ? es.eigenvalues()[0] : 0.0;
    if (!(smallest > 1e-10))
        throw StructuralError("metric is not positive definite at " + format_point(x) +
                              " (smallest eigenvalue " + format_real(smallest) + ")");
}

inline Mat metric_at(const ManifoldSpec& M, const Vec& x) {
    Mat g = evaluate_matrix(M.metric, M.dim, x);
    require_positive_definite(g, x);
    return g;
}

inline Mat affinor_at(const ManifoldSpec& M, const Vec& x) { return evaluate_matrix(M.affinor, M.dim, x); }

/// Gamma(k, i, j) = Gamma^k_ij.
inline Tensor3 christoffel_from(const MatrixJet& g) {
    const int m = static_cast<int>(g.value.rows());
    Mat ginv = g.value.inverse();
    Tensor3 lowered(m);  // Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                const double v = 0.5 * (g.d[static_cast<std::size_t>(i)](j, l) + g.d[static_cast<std::size_t>(j)](i, l) -
                                        g.d[static_cast<std::size_t>(l)](i, j));
                lowered(l, i, j) = v;
                lowered(l, j, i) = v;
            }
    Tensor3 gamma(m);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (int l = 0; l < m; ++l) s += ginv(k, l) * lowered(l, i, j);
                gamma(k, i, j) = s;
                gamma(k, j, i) = s;
            }
    return gamma;
}

inline Tensor3 christoffel(const ManifoldSpec& M, const Vec& x) {
    MatrixJet g = evaluate_matrix_jet(M.metric, M.dim, x);
    require_positive_definite(g.value, x);
    return christoffel_from(g);
}

/// Gamma^k_ij a^i b^j.
inline Vec contract_christoffel(const Tensor3& gamma, const Vec& a, const Vec& b) {
    const int m = gamma.size();
    Vec out = Vec::Zero(m);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i) {
            if (a[i] == 0.0) continue;
            for (int j = 0; j < m; ++j) out[k] += gamma(k, i, j) * a[i] * b[j];
        }
    return out;
}

/// (nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j.
inline Vec covariant_derivative(const ManifoldSpec& M, const VectorField& X, const VectorField& Y, const Vec& x) {
    const Vec xv = X(x);
    return Y.jacobian(x) * xv + contract_christoffel(christoffel(M, x), xv, Y(x));
}

/// [X, Y]^k = X^i d_i Y^k - Y^i d_i X^k.
inline Vec lie_bracket(const VectorField& X, const VectorField& Y, const Vec& x) {
    return Y.jacobian(x) * X(x) - X.jacobian(x) * Y(x);
}

/// The procedural field x -> A(x) X(x) for a matrix of expressions A.
inline VectorField apply_affinor(std::shared_ptr<const std::vector<Expression>> A, int m, const VectorField& X) {
    return VectorField::procedural(X.domain_dim(), m, [A, m, X](const Vec& x) -> Vec {
        return evaluate_matrix(*A, m, x) * X(x);
    });
}

/// N_A(X, Y) = [AX, AY] + A^2 [X, Y] - A [AX, Y] - A [X, AY] at x, with AX and
/// AY formed as procedural fields.
inline Vec nijenhuis_of(const std::vector<Expression>& A, int m, const VectorField& X, const VectorField& Y,
                        const Vec& x) {
    auto shared = std::make_shared<const std::vector<Expression>>(A);
    VectorField AX = apply_affinor(shared, m, X);
    VectorField AY = apply_affinor(shared, m, Y);
    const Mat a = evaluate_matrix(A, m, x);
    return lie_bracket(AX, AY, x) + a * (a * lie_bracket(X, Y, x)) - a * lie_bracket(AX, Y, x) -
           a * lie_bracket(X, AY, x);
}

/// Nijenhuis tensor of the ambient affinor evaluated on two vectors at x, from
/// the coordinate formula
///   N^i = F^l_j d_l F^i_k v^j w^k - F^l_k d_l F^i_j v^j w^k
///         - F^i_l (d_j F^l_k - d_k F^l_j) v^j w^k.
/// Tensorial, so it needs no extension of v and w.
inline Vec nijenhuis_tensor(const ManifoldSpec& M, const Vec& x, const Vec& v, const Vec& w) {
    const int m = M.dim;
    MatrixJet F = evaluate_matrix_jet(M.affinor, m, x);
    const Vec Fv = F.value * v;
    const Vec Fw = F.value * w;
    Vec first = Vec::Zero(m);   // (D_{Fv} F) w - (D_{Fw} F) v
    Vec inner = Vec::Zero(m);   // (D_v F) w - (D_w F) v
    for (int l = 0; l < m; ++l) {
        const Mat& dl = F.d[static_cast<std::size_t>(l)];
        first += Fv[l] * (dl * w) - Fw[l] * (dl * v);
        inner += v[l] * (dl * w) - w[l] * (dl * v);
    }
    return first - F.value * inner;
}

/// (nabla_k F)^i_j at x, stored at (i, j, k):
///   d_k F^i_j + Gamma^i_kl F^l_j - Gamma^l_kj F^i_l.
inline Tensor3 nabla_affinor(const ManifoldSpec& M, const Vec& x) {
    const int m = M.dim;
    MatrixJet F = evaluate_matrix_jet(M.affinor, m, x);
    Tensor3 gamma = christoffel(M, x);
    Tensor3 out(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                double v = F.d[static_cast<std::size_t>(k)](i, j);
                for (int l = 0; l < m; ++l) v += gamma(i, k, l) * F.value(l, j) - gamma(l, k, j) * F.value(i, l);
                out(i, j, k) = v;
            }
    return out;
}

/// Structural validation of a manifold spec on `probes` deterministic points.
inline void validate_manifold(const ManifoldSpec& M, int probes = 10) {
    if (M.dim <= 0) throw StructuralError("dimension must be positive");
    if (M.mu != 1 && M.mu != -1) throw StructuralError("mu must be -1 or +1");
    const auto mm = static_cast<std::size_t>(M.dim * M.dim);
    if (M.metric.size() != mm) throw StructuralError("metric must have dim*dim entries");
    if (M.affinor.size() != mm) throw StructuralError("affinor must have dim*dim entries");
    if (M.domain.size() != static_cast<std::size_t>(M.dim)) throw StructuralError("domain must have dim intervals");
    for (const auto& iv : M.domain)
        if (!(iv.hi > iv.lo)) throw StructuralError("domain intervals must have positive length");
    for (const auto* list : {&M.metric, &M.affinor})
        for (const auto& e : *list)
            if (e.arity() != static_cast<std::size_t>(M.dim) && !e.is_constant())
                throw StructuralError("expression '" + e.to_string() + "' has wrong arity");
    for (const Vec& x : sample_points(M.domain, probes, kDefaultSeed)) {
        Mat g = evaluate_matrix(M.metric, M.dim, x);
        for (int i = 0; i < M.dim; ++i)
            for (int j = i + 1; j < M.dim; ++j)
                if (std::abs(g(i, j) - g(j, i)) > 1e-12 * (1.0 + std::abs(g(i, j))))
                    throw StructuralError("metric is not symmetric: g_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                          " != g_" + std::to_string(j + 1) + std::to_string(i + 1) + " at " +
                                          format_point(x));
        require_positive_definite(g, x);
        (void)affinor_at(M, x);
    }
}

}  // namespace affinor
