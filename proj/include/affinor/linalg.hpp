#pragma once

// Small dense linear algebra on top of Eigen: metric inner products, rank
// decisions with an ambiguity band, Gram-Schmidt and principal angles.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace affinor {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace tol {
inline constexpr double rank_relative = 1e-8;
inline constexpr double rank_floor = 1e-12;
inline constexpr double ambiguous_low = 1e-10;
inline constexpr double ambiguous_high = 1e-6;
inline constexpr double projected_norm = 1e-8;
}  // namespace tol

inline double g_inner(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }
inline double g_norm(const Mat& g, const Vec& a) { return std::sqrt(std::max(0.0, g_inner(g, a, a))); }

inline Vec singular_values(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return Vec();
    return Eigen::JacobiSVD<Mat>(a).singularValues();
}

inline double spectral_norm(const Mat& a) {
    Vec s = singular_values(a);
    return s.size() == 0 ? 0.0 : s[0];
}

struct RankDecision {
    int rank = 0;
    bool ambiguous = false;
    double scale = 0.0;  // reference magnitude the thresholds are relative to
    Vec singular_values;
};

/// Counts singular values above `relative * scale` (with an absolute floor).
/// Any value inside the band [ambiguous_low, ambiguous_high] * scale marks the
/// decision as ambiguous.
inline RankDecision decide_rank(const Vec& sv, double scale, double relative = tol::rank_relative) {
    RankDecision d;
    d.singular_values = sv;
    d.scale = scale;
    const double cut = std::max(relative * scale, tol::rank_floor);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] >= cut) ++d.rank;
        if (scale > 0.0 && sv[i] >= tol::ambiguous_low * scale && sv[i] <= tol::ambiguous_high * scale)
            d.ambiguous = true;
    }
    return d;
}

inline RankDecision decide_rank(const Mat& a) {
    Vec sv = singular_values(a);
    const double scale = sv.size() ? sv[0] : 0.0;
    return decide_rank(sv, scale);
}

struct OrthonormalResult {
    Mat basis;                // columns g-orthonormal
    std::vector<int> kept;    // indices of input columns that contributed
};

/// Modified Gram-Schmidt of the columns of `v` under metric `g`, after first
/// removing components along the (already g-orthonormal) columns of `against`.
/// Columns whose residual g-norm drops below `drop` are skipped.
inline OrthonormalResult gram_schmidt(const Mat& v, const Mat& g, const Mat& against = Mat(),
                                      double drop = tol::projected_norm, Eigen::Index max_count = -1) {
    OrthonormalResult out;
    const Eigen::Index m = v.rows();
    std::vector<Vec> accepted;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        if (max_count >= 0 && static_cast<Eigen::Index>(accepted.size()) >= max_count) break;
        Vec w = v.col(c);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index a = 0; a < against.cols(); ++a) w -= g_inner(g, against.col(a), w) * against.col(a);
            for (const Vec& q : accepted) w -= g_inner(g, q, w) * q;
        }
        const double n = g_norm(g, w);
        if (n < drop) continue;
        accepted.push_back(w / n);
        out.kept.push_back(static_cast<int>(c));
    }
    out.basis = Mat(m, static_cast<Eigen::Index>(accepted.size()));
    for (std::size_t i = 0; i < accepted.size(); ++i) out.basis.col(static_cast<Eigen::Index>(i)) = accepted[i];
    return out;
}

/// Euclidean orthonormal basis of the orthogonal complement of span(a) in R^k,
/// where `a` has orthonormal columns.
inline Mat orthogonal_complement(const Mat& a, Eigen::Index k) {
    if (a.cols() == 0) return Mat::Identity(k, k);
    Mat proj = Mat::Identity(k, k) - a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(proj);
    const Eigen::Index want = k - a.cols();
    // eigenvalues ascending; complement has eigenvalue 1
    return es.eigenvectors().rightCols(want);
}

/// Largest principal angle (radians) between subspaces spanned by the
/// orthonormal columns of `a` and `b`. Different dimensions give pi/2; two
/// zero-dimensional subspaces give 0.
inline double max_principal_angle(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) return std::numbers::pi / 2;
    if (a.cols() == 0) return 0.0;
    // sin of the largest angle is the norm of the part of a outside span(b),
    // which stays accurate for tiny angles where acos does not.
    Mat outside = a - b * (b.transpose() * a);
    const double s = std::min(1.0, spectral_norm(outside));
    return std::asin(s);
}

}  // namespace affinor
