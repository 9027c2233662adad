#pragma once

// Embedded submanifolds N -> M given by a parametrisation u -> f(u):
// orthonormal frames, induced metric, second fundamental form, Weingarten
// operator and normal connection.
//
// All derivatives of fields along N are taken along curves in parameter space,
// so no extension of tangent or normal fields off N is ever needed.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affinor/chart.hpp"

namespace affinor {

struct SubmanifoldSpec {
    std::string name;
    int dim = 0;                                     // n
    std::vector<Expression> embedding;               // m expressions in u1..un
    std::shared_ptr<const ManifoldSpec> ambient;
    Domain domain;
    std::vector<std::vector<Expression>> frame_D;    // optional user frame for D, each n expressions

    const ManifoldSpec& M() const { return *ambient; }
};

struct FrameData {
    Vec u;
    Vec x;
    Mat metric;                    // g(x)
    Mat jacobian;                  // m x n, columns d_a f
    Mat tangent;                   // m x n, g-orthonormal
    Mat normal;                    // m x (m - n), g-orthonormal
    Mat r;                         // n x n upper triangular, jacobian = tangent * r
    std::vector<int> normal_pivots;
    std::vector<Mat> second;       // second[k](a, b) = d_a d_b f^k
    Tensor3 gamma;

    int m() const { return static_cast<int>(jacobian.rows()); }
    int n() const { return static_cast<int>(jacobian.cols()); }

    double inner(const Vec& a, const Vec& b) const { return g_inner(metric, a, b); }
    double norm(const Vec& a) const { return g_norm(metric, a); }

    Vec tangent_coords(const Vec& v) const { return tangent.transpose() * (metric * v); }
    Vec normal_coords(const Vec& v) const { return normal.transpose() * (metric * v); }
    Vec tangent_part(const Vec& v) const { return tangent * tangent_coords(v); }
    Vec normal_part(const Vec& v) const { return normal * normal_coords(v); }

    /// Parameter-space components of the tangential part of v.
    Vec to_param(const Vec& v) const {
        return r.triangularView<Eigen::Upper>().solve(tangent_coords(v));
    }
    Vec push(const Vec& a) const { return jacobian * a; }

    /// sum_k e_k d_a d_b f^k a^a b^b
    Vec second_derivative(const Vec& a, const Vec& b) const {
        Vec out(m());
        for (int k = 0; k < m(); ++k) out[k] = a.dot(second[static_cast<std::size_t>(k)] * b);
        return out;
    }
};

namespace detail {

inline FrameData build_frame(const SubmanifoldSpec& S, const Vec& u, const std::vector<int>* frozen_pivots) {
    const ManifoldSpec& M = S.M();
    const int m = M.dim;
    const int n = S.dim;
    if (u.size() != n) throw PreconditionError("parameter point has wrong dimension");
    FrameData fd;
    fd.u = u;
    fd.x = Vec(m);
    fd.jacobian = Mat(m, n);
    fd.second.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const Expression& e = S.embedding[static_cast<std::size_t>(k)];
        if (e.is_constant()) {
            fd.x[k] = evaluate(e, u);
            fd.jacobian.row(k).setZero();
            fd.second[static_cast<std::size_t>(k)] = Mat::Zero(n, n);
            continue;
        }
        Jet2 jet = evaluate_jet(e, u, 2);
        fd.x[k] = jet.value;
        fd.jacobian.row(k) = jet.gradient.transpose();
        fd.second[static_cast<std::size_t>(k)] = jet.hessian_matrix();
    }

    Vec sv = singular_values(fd.jacobian);
    if (sv.size() < n || !(sv[n - 1] > tol::rank_relative * sv[0])) {
        std::string s;
        for (Eigen::Index i = 0; i < sv.size(); ++i) s += (i ? ", " : "") + format_real(sv[i]);
        throw StructuralError("embedding Jacobian is rank deficient at u = " + format_point(u) +
                              " (singular values " + s + ")");
    }

    MatrixJet g = evaluate_matrix_jet(M.metric, m, fd.x);
    require_positive_definite(g.value, fd.x);
    fd.metric = g.value;
    fd.gamma = christoffel_from(g);

    OrthonormalResult t = gram_schmidt(fd.jacobian, fd.metric, Mat(), 0.0);
    fd.tangent = t.basis;
    fd.r = fd.tangent.transpose() * fd.metric * fd.jacobian;
    fd.r.triangularView<Eigen::StrictlyLower>().setZero();

    if (frozen_pivots) {
        Mat chosen(m, static_cast<Eigen::Index>(frozen_pivots->size()));
        for (std::size_t i = 0; i < frozen_pivots->size(); ++i)
            chosen.col(static_cast<Eigen::Index>(i)) = Mat::Identity(m, m).col((*frozen_pivots)[i]);
        OrthonormalResult nr = gram_schmidt(chosen, fd.metric, fd.tangent, 0.0);
        fd.normal = nr.basis;
        fd.normal_pivots = *frozen_pivots;
    } else {
        OrthonormalResult nr = gram_schmidt(Mat::Identity(m, m), fd.metric, fd.tangent, tol::projected_norm, m - n);
        fd.normal = nr.basis;
        fd.normal_pivots = nr.kept;
    }
    if (fd.normal.cols() != m - n)
        throw StructuralError("could not complete a normal frame at u = " + format_point(u));
    return fd;
}

}  // namespace detail

/// Orthonormal tangent and normal frames at u. Tangent frame: Gram-Schmidt of
/// the Jacobian columns in order. Normal frame: Gram-Schmidt of the standard
/// ambient basis vectors in index order, skipping near-tangent ones.
inline FrameData frames_at(const SubmanifoldSpec& S, const Vec& u) { return detail::build_frame(S, u, nullptr); }

/// Same as frames_at with the normal pivots fixed, so the normal frame is a
/// smooth function of u near a base point.
inline FrameData frames_at(const SubmanifoldSpec& S, const Vec& u, const std::vector<int>& pivots) {
    return detail::build_frame(S, u, &pivots);
}

inline Mat induced_metric(const SubmanifoldSpec& S, const Vec& u) {
    FrameData fd = frames_at(S, u);
    return fd.jacobian.transpose() * fd.metric * fd.jacobian;
}

/// h(a, b) for parameter vectors a, b at the frame point. Tensorial:
/// normal part of d_a d_b f + Gamma(f_* a, f_* b).
inline Vec second_fundamental_form_at(const FrameData& fd, const Vec& a, const Vec& b) {
    return fd.normal_part(fd.second_derivative(a, b) + contract_christoffel(fd.gamma, fd.push(a), fd.push(b)));
}

/// Ambient covariant derivative of the pushed-forward parameter field Y along
/// the parameter vector a.
inline Vec ambient_covariant_derivative(const FrameData& fd, const Vec& a, const VectorField& Y) {
    const Vec y = Y(fd.u);
    return fd.second_derivative(a, y) + fd.push(Y.jacobian(fd.u) * a) +
           contract_christoffel(fd.gamma, fd.push(a), fd.push(y));
}

/// Induced Levi-Civita connection: tangential part of the ambient derivative.
inline Vec induced_covariant_derivative(const FrameData& fd, const Vec& a, const VectorField& Y) {
    return fd.tangent_part(ambient_covariant_derivative(fd, a, Y));
}

inline Vec second_fundamental_form(const SubmanifoldSpec& S, const Vec& u, const Vec& X, const VectorField& Y) {
    FrameData fd = frames_at(S, u);
    return fd.normal_part(ambient_covariant_derivative(fd, X, Y));
}

/// Ambient derivative of a field V : u -> T_{f(u)}M along the parameter vector a.
inline Vec ambient_derivative_along(const FrameData& fd, const VectorField& V, const Vec& a) {
    return V.jacobian(fd.u) * a + contract_christoffel(fd.gamma, fd.push(a), V(fd.u));
}

struct WeingartenResult {
    Vec shape;              // A_V X, ambient tangent vector
    Vec normal_connection;  // nabla-perp_X V, ambient normal vector
};

inline constexpr double kNormalityTolerance = 1e-8;

inline WeingartenResult weingarten_operator(const FrameData& fd, const VectorField& V, const Vec& X) {
    const Vec v = V(fd.u);
    const double off = fd.norm(fd.tangent_part(v));
    if (off > kNormalityTolerance * std::max(1.0, fd.norm(v)))
        throw PreconditionError("field is not normal at u = " + format_point(fd.u) + " (tangential part " +
                                format_real(off) + ")");
    const Vec d = ambient_derivative_along(fd, V, X);
    return {-fd.tangent_part(d), fd.normal_part(d)};
}

inline WeingartenResult weingarten_operator(const SubmanifoldSpec& S, const Vec& u, const VectorField& V,
                                            const Vec& X) {
    return weingarten_operator(frames_at(S, u), V, X);
}

/// Parameter-space field u -> k-th normal frame vector, pivots frozen.
inline VectorField normal_frame_field(const SubmanifoldSpec& S, int k, std::vector<int> pivots) {
    auto spec = std::make_shared<const SubmanifoldSpec>(S);
    return VectorField::procedural(S.dim, S.M().dim, [spec, k, pivots](const Vec& u) -> Vec {
        return frames_at(*spec, u, pivots).normal.col(k);
    });
}

/// Structural validation of a submanifold spec against its ambient on
/// `probes` deterministic parameter points.
inline void validate_submanifold(const SubmanifoldSpec& S, int probes = 10) {
    if (!S.ambient) throw StructuralError("submanifold has no ambient manifold");
    const int m = S.M().dim;
    if (S.dim <= 0 || S.dim >= m) throw StructuralError("submanifold dimension must satisfy 0 < n < m");
    if (S.embedding.size() != static_cast<std::size_t>(m))
        throw StructuralError("embedding must have " + std::to_string(m) + " components");
    if (S.domain.size() != static_cast<std::size_t>(S.dim)) throw StructuralError("domain must have dim intervals");
    for (const auto& iv : S.domain)
        if (!(iv.hi > iv.lo)) throw StructuralError("domain intervals must have positive length");
    for (const auto& row : S.frame_D)
        if (row.size() != static_cast<std::size_t>(S.dim))
            throw StructuralError("frame_D rows must have " + std::to_string(S.dim) + " components");
    if (S.frame_D.size() > static_cast<std::size_t>(S.dim)) throw StructuralError("frame_D has more rows than dim");
    for (const Vec& u : sample_points(S.domain, probes, kDefaultSeed)) {
        const FrameData fd = frames_at(S, u);
        require_positive_definite(fd.metric, fd.x);
    }
}

/// Tangent vectors of the orthonormal frame expressed in parameter components.
inline Mat tangent_frame_params(const FrameData& fd) {
    return fd.r.triangularView<Eigen::Upper>().solve(Mat::Identity(fd.n(), fd.n()));
}

inline constexpr double kDualityThreshold = 1e-6;
inline constexpr double kTotallyGeodesicThreshold = 1e-6;
inline constexpr double kSymmetryThreshold = 1e-8;
inline constexpr double kFrameThreshold = 1e-10;

/// Max |Gram(tangent, normal) - I| over samples; notes pivot changes.
inline CheckReport frame_check(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    auto per = parallel_map<std::pair<double, std::vector<int>>>(samples.size(), [&](std::size_t i) {
        FrameData fd = frames_at(S, samples[i]);
        Mat e(fd.m(), fd.m());
        e << fd.tangent, fd.normal;
        Mat gram = e.transpose() * fd.metric * e;
        return std::make_pair((gram - Mat::Identity(fd.m(), fd.m())).cwiseAbs().maxCoeff(), fd.normal_pivots);
    });
    MaxTracker t;
    bool pivot_change = false;
    for (std::size_t i = 0; i < per.size(); ++i) {
        t.update(per[i].first, samples[i]);
        if (per[i].second != per.front().second) pivot_change = true;
    }
    return threshold_report("frames_orthonormal", t, kFrameThreshold,
                            pivot_change ? "warning: normal frame pivots change across the sample set" : "");
}

/// max |g(h(X,Y),V) - g(A_V X, Y)| over orthonormal tangent pairs and normal
/// frame vectors.
inline CheckReport duality_check(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    auto per = parallel_map<double>(samples.size(), [&](std::size_t s) {
        FrameData fd = frames_at(S, samples[s]);
        const Mat params = tangent_frame_params(fd);
        const int n = fd.n();
        const int codim = fd.m() - n;
        double worst = 0.0;
        for (int k = 0; k < codim; ++k) {
            VectorField V = normal_frame_field(S, k, fd.normal_pivots);
            const Vec v = fd.normal.col(k);
            for (int a = 0; a < n; ++a) {
                const Vec A = weingarten_operator(fd, V, params.col(a)).shape;
                for (int b = 0; b < n; ++b) {
                    const Vec h = second_fundamental_form_at(fd, params.col(a), params.col(b));
                    worst = std::max(worst, std::abs(fd.inner(h, v) - fd.inner(A, fd.tangent.col(b))));
                }
            }
        }
        return worst;
    });
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], samples[i]);
    return threshold_report("eq_1_4_duality", t, kDualityThreshold);
}

/// max |h(X,Y) - h(Y,X)| with Y extended as the constant parameter field, so
/// the two orders go through different derivative paths.
inline CheckReport h_symmetry_check(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    auto per = parallel_map<double>(samples.size(), [&](std::size_t s) {
        FrameData fd = frames_at(S, samples[s]);
        const Mat params = tangent_frame_params(fd);
        double worst = 0.0;
        for (int a = 0; a < fd.n(); ++a)
            for (int b = a + 1; b < fd.n(); ++b) {
                const Vec hab =
                    fd.normal_part(ambient_covariant_derivative(fd, params.col(a), VectorField::constant(params.col(b), fd.n())));
                const Vec hba =
                    fd.normal_part(ambient_covariant_derivative(fd, params.col(b), VectorField::constant(params.col(a), fd.n())));
                worst = std::max(worst, fd.norm(hab - hba));
            }
        return worst;
    });
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], samples[i]);
    return threshold_report("h_symmetry", t, kSymmetryThreshold);
}

inline CheckReport totally_geodesic_check(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    auto per = parallel_map<double>(samples.size(), [&](std::size_t s) {
        FrameData fd = frames_at(S, samples[s]);
        const Mat params = tangent_frame_params(fd);
        double worst = 0.0;
        for (int a = 0; a < fd.n(); ++a)
            for (int b = a; b < fd.n(); ++b)
                worst = std::max(worst, fd.norm(second_fundamental_form_at(fd, params.col(a), params.col(b))));
        return worst;
    });
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], samples[i]);
    CheckReport r = threshold_report("totally_geodesic", t, kTotallyGeodesicThreshold);
    r.detail = r.status == Status::pass ? "totally geodesic" : "not totally geodesic";
    return r;
}

}  // namespace affinor
