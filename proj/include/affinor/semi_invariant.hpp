#pragma once

// Semi-invariant structure of a submanifold: the splits TN = D + D-perp and
// T-perp N = F(D-perp) + D-tilde, the projectors P and Q, F = phi + omega on TN,
// and the pointwise checks built on them.
//
// D-perp is extracted as the kernel of (tangential part of F) restricted to TN,
// D as its orthogonal complement. The semi-invariance conditions are then
// verified, never assumed. A user frame for D overrides the extraction.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "affinor/submanifold.hpp"

namespace affinor {

inline constexpr double kSemiInvariantThreshold = 1e-6;
inline constexpr double kReassemblyThreshold = 1e-10;
inline constexpr double kAngleThreshold = 1e-6;
inline constexpr double kLagrangianThreshold = 1e-8;

struct SplitData {
    FrameData frame;
    Mat F;             // affinor at f(u)
    Mat D;             // ambient, g-orthonormal columns
    Mat Dperp;
    Mat FDperp;
    Mat Dtilde;
    Mat d_coords;      // n x p, in the orthonormal tangent frame
    Mat dperp_coords;  // n x q
    int p = 0;
    int q = 0;
    Vec singular_values;  // decision spectrum of the tangential part of F on TN
    double scale = 0.0;
    bool ambiguous = false;

    int n() const { return frame.n(); }

    /// Projectors in the orthonormal tangent frame.
    Mat P() const { return d_coords * d_coords.transpose(); }
    Mat Q() const { return Mat::Identity(n(), n()) - P(); }

    /// Projectors acting on parameter-space components: R^-1 P R.
    Mat P_param() const { return frame.r.triangularView<Eigen::Upper>().solve(P() * frame.r); }
    Mat Q_param() const { return Mat::Identity(n(), n()) - P_param(); }

    /// phi = F o P as a map on parameter components (tangential part only).
    Mat phi_param() const {
        const Mat tangential = frame.tangent.transpose() * frame.metric * F * frame.tangent;
        return frame.r.triangularView<Eigen::Upper>().solve(tangential * P() * frame.r);
    }

    Vec project(const Mat& basis, const Vec& v) const { return basis * (basis.transpose() * (frame.metric * v)); }
};

inline SplitData split_from_frame(const SubmanifoldSpec& S, FrameData fd) {
    const ManifoldSpec& M = S.M();
    const int m = M.dim;
    const int n = S.dim;
    SplitData sd;
    sd.F = affinor_at(M, fd.x);
    Mat E(m, m);
    E << fd.tangent, fd.normal;
    const Mat C = E.transpose() * fd.metric * sd.F * fd.tangent;  // F on TN in the full orthonormal frame
    const Mat B = C.topRows(n);
    sd.scale = spectral_norm(C);

    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullV);
    sd.singular_values = svd.singularValues();
    if (!S.frame_D.empty()) {
        Mat pushed(m, static_cast<Eigen::Index>(S.frame_D.size()));
        for (std::size_t i = 0; i < S.frame_D.size(); ++i) {
            Vec a(n);
            for (int j = 0; j < n; ++j) a[j] = evaluate(S.frame_D[i][static_cast<std::size_t>(j)], fd.u);
            pushed.col(static_cast<Eigen::Index>(i)) = fd.push(a);
        }
        Mat d = gram_schmidt(pushed, fd.metric).basis;
        sd.d_coords = fd.tangent.transpose() * fd.metric * d;
        sd.dperp_coords = orthogonal_complement(sd.d_coords, n);
    } else {
        RankDecision rd = decide_rank(sd.singular_values, sd.scale);
        sd.ambiguous = rd.ambiguous;
        const Mat V = svd.matrixV();
        sd.d_coords = V.leftCols(rd.rank);
        sd.dperp_coords = V.rightCols(n - rd.rank);
    }
    sd.p = static_cast<int>(sd.d_coords.cols());
    sd.q = static_cast<int>(sd.dperp_coords.cols());
    sd.D = fd.tangent * sd.d_coords;
    sd.Dperp = fd.tangent * sd.dperp_coords;

    const double drop = std::max(tol::rank_relative * sd.scale, tol::rank_floor);
    sd.FDperp = gram_schmidt(sd.F * sd.Dperp, fd.metric, Mat(), drop).basis;

    // D-tilde: complement of the normal projection of F(D-perp) inside T-perp N.
    const Mat W = fd.normal.transpose() * fd.metric * sd.FDperp;
    Mat w_basis(m - n, 0);
    if (W.cols() > 0 && W.rows() > 0) {
        Eigen::JacobiSVD<Mat> ws(W, Eigen::ComputeFullU);
        const int r = decide_rank(ws.singularValues(), 1.0).rank;
        w_basis = ws.matrixU().leftCols(r);
    }
    sd.Dtilde = fd.normal * orthogonal_complement(w_basis, m - n);
    sd.frame = std::move(fd);
    return sd;
}

inline SplitData split_tangent(const SubmanifoldSpec& S, const Vec& u) { return split_from_frame(S, frames_at(S, u)); }

inline std::vector<SplitData> split_samples(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return parallel_map<SplitData>(samples.size(), [&](std::size_t i) { return split_tangent(S, samples[i]); });
}

struct PhiOmega {
    Vec phi;    // tangent
    Vec omega;  // normal
};

/// phi X = F(P X), omega X = F(Q X) for an ambient tangent vector X.
inline PhiOmega phi_omega(const SplitData& sd, const Vec& X) {
    const Vec a = sd.frame.tangent_coords(X);
    const Vec px = sd.frame.tangent * (sd.P() * a);
    const Vec qx = sd.frame.tangent * (sd.Q() * a);
    return {sd.F * px, sd.F * qx};
}

namespace detail {

inline std::optional<Vec> first_ambiguous(const std::vector<SplitData>& splits) {
    for (const auto& s : splits)
        if (s.ambiguous) return s.frame.u;
    return std::nullopt;
}

inline CheckReport rank_ambiguous_report(std::string id, const Vec& at) {
    CheckReport r;
    r.check_id = std::move(id);
    r.status = Status::rank_ambiguous;
    r.threshold = scaled(kSemiInvariantThreshold);
    r.witness = at;
    r.detail = "a singular value of the tangential part of F lies in the ambiguous band";
    return r;
}

inline int rank_of(const SplitData& sd, const Mat& vectors, double scale) {
    if (vectors.cols() == 0) return 0;
    Mat E(sd.frame.m(), sd.frame.m());
    E << sd.frame.tangent, sd.frame.normal;
    return decide_rank(singular_values(E.transpose() * sd.frame.metric * vectors), scale).rank;
}

}  // namespace detail

struct Definition21Result {
    std::vector<CheckReport> reports;  // (i), (ii), (iii)
    bool passed = false;
    std::set<int> f2_ranks;
};

inline Definition21Result verify_definition21(const std::vector<SplitData>& splits) {
    Definition21Result out;
    const std::string ids[3] = {"def_2_1_i_D_invariant", "def_2_1_ii_Dperp_anti_invariant",
                                "def_2_1_iii_F2Dperp_distribution"};
    if (auto at = detail::first_ambiguous(splits)) {
        for (const auto& id : ids) out.reports.push_back(detail::rank_ambiguous_report(id, *at));
        return out;
    }
    MaxTracker inv, anti, f2;
    for (const SplitData& sd : splits) {
        const FrameData& fd = sd.frame;
        double a = 0.0, b = 0.0, c = 0.0;
        for (Eigen::Index i = 0; i < sd.D.cols(); ++i) {
            const Vec fd_i = sd.F * sd.D.col(i);
            a = std::max(a, fd.norm(fd_i - sd.project(sd.D, fd_i)));
        }
        for (Eigen::Index i = 0; i < sd.Dperp.cols(); ++i) {
            b = std::max(b, fd.norm(fd.tangent_part(sd.F * sd.Dperp.col(i))));
            c = std::max(c, fd.norm(fd.normal_part(sd.F * (sd.F * sd.Dperp.col(i)))));
        }
        inv.update(a, fd.u);
        anti.update(b, fd.u);
        f2.update(c, fd.u);
        const double f_scale = spectral_norm(sd.F);
        out.f2_ranks.insert(detail::rank_of(sd, sd.F * sd.F * sd.Dperp, f_scale * f_scale));
    }
    out.reports.push_back(threshold_report(ids[0], inv, kSemiInvariantThreshold));
    out.reports.push_back(threshold_report(ids[1], anti, kSemiInvariantThreshold));
    CheckReport r3 = threshold_report(ids[2], f2, kSemiInvariantThreshold);
    std::string ranks;
    for (int r : out.f2_ranks) ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
    r3.detail = "rank F^2(D-perp) = {" + ranks + "}";
    if (out.f2_ranks.size() > 1) {
        r3.status = Status::fail;
        r3.detail += " not constant across samples";
    }
    out.reports.push_back(std::move(r3));
    out.passed = std::all_of(out.reports.begin(), out.reports.end(),
                             [](const CheckReport& r) { return r.status == Status::pass; });
    return out;
}

inline Definition21Result verify_definition21(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return verify_definition21(split_samples(S, samples));
}

enum class SubmanifoldLabel { invariant, anti_invariant, proper, normal_proper, normal_anti_invariant, none };

inline std::string_view label_name(SubmanifoldLabel l) {
    switch (l) {
    case SubmanifoldLabel::invariant: return "invariant";
    case SubmanifoldLabel::anti_invariant: return "anti-invariant";
    case SubmanifoldLabel::proper: return "proper";
    case SubmanifoldLabel::normal_proper: return "normal-proper";
    case SubmanifoldLabel::normal_anti_invariant: return "normal-anti-invariant";
    case SubmanifoldLabel::none: return "none";
    }
    return "?";
}

struct SubmanifoldClassification {
    SubmanifoldLabel label = SubmanifoldLabel::none;
    int p = -1;
    int q = -1;
    int dtilde = -1;
    CheckReport report;
};

inline SubmanifoldClassification classify_submanifold(const std::vector<SplitData>& splits,
                                                      const Definition21Result& def21) {
    SubmanifoldClassification c;
    c.report.check_id = "def_2_1_classification";
    c.report.threshold = 0.0;
    if (auto at = detail::first_ambiguous(splits)) {
        c.report.status = Status::rank_ambiguous;
        c.report.witness = *at;
        c.report.detail = "rank decision ambiguous";
        return c;
    }
    std::set<std::tuple<int, int, int>> dims;
    for (const SplitData& sd : splits) dims.insert({sd.p, sd.q, static_cast<int>(sd.Dtilde.cols())});
    if (dims.size() != 1) {
        c.report.status = Status::rank_ambiguous;
        c.report.detail = "(p, q, dim D-tilde) not constant across samples";
        return c;
    }
    std::tie(c.p, c.q, c.dtilde) = *dims.begin();
    const std::string dims_text =
        "p=" + std::to_string(c.p) + " q=" + std::to_string(c.q) + " dim_Dtilde=" + std::to_string(c.dtilde);
    if (!def21.passed) {
        c.report.status = Status::fail;
        c.report.detail = "label=none (not semi-invariant) " + dims_text;
        return c;
    }
    const bool normal = c.dtilde == 0;
    if (c.q == 0)
        c.label = SubmanifoldLabel::invariant;
    else if (c.p == 0)
        c.label = normal ? SubmanifoldLabel::normal_anti_invariant : SubmanifoldLabel::anti_invariant;
    else
        c.label = normal ? SubmanifoldLabel::normal_proper : SubmanifoldLabel::proper;
    c.report.status = Status::pass;
    c.report.detail = "label=" + std::string(label_name(c.label)) + " " + dims_text;
    return c;
}

/// Proposition checks (iv) phi is mu-compatible on N, (v) F^2(D-perp) lies in
/// D-perp, (vi) D-tilde is F-invariant.
inline std::vector<CheckReport> verify_prop25(const std::vector<SplitData>& splits, int mu) {
    MaxTracker iv, v, vi;
    for (const SplitData& sd : splits) {
        const FrameData& fd = sd.frame;
        const Mat K = fd.tangent.transpose() * fd.metric * sd.F * fd.tangent * sd.P();  // K(b,a) = g(phi t_a, t_b)
        iv.update((K.transpose() + mu * K).cwiseAbs().maxCoeff(), fd.u);
        double a = 0.0, b = 0.0;
        for (Eigen::Index i = 0; i < sd.Dperp.cols(); ++i) {
            const Vec f2 = sd.F * (sd.F * sd.Dperp.col(i));
            a = std::max(a, fd.norm(f2 - sd.project(sd.Dperp, f2)));
        }
        for (Eigen::Index i = 0; i < sd.Dtilde.cols(); ++i) {
            const Vec fv = sd.F * sd.Dtilde.col(i);
            b = std::max(b, fd.norm(fd.tangent_part(fv) + sd.project(sd.FDperp, fv)));
        }
        v.update(a, fd.u);
        vi.update(b, fd.u);
    }
    return {threshold_report("prop_2_5_iv_phi_structure", iv, kSemiInvariantThreshold),
            threshold_report("prop_2_5_v_F2Dperp_in_Dperp", v, kSemiInvariantThreshold),
            threshold_report("prop_2_5_vi_Dtilde_invariant", vi, kSemiInvariantThreshold)};
}

namespace detail {

/// Principal angle between span(image) and span(target), both ambient, in the
/// g-orthonormal frame at the split point.
inline double span_angle(const SplitData& sd, const Mat& image, const Mat& target) {
    const FrameData& fd = sd.frame;
    Mat E(fd.m(), fd.m());
    E << fd.tangent, fd.normal;
    const double drop = std::max(tol::rank_relative * spectral_norm(sd.F) * spectral_norm(sd.F), tol::rank_floor);
    const Mat a = E.transpose() * fd.metric * gram_schmidt(image, fd.metric, Mat(), drop).basis;
    const Mat b = E.transpose() * fd.metric * target;
    return max_principal_angle(a, b);
}

}  // namespace detail

/// Equalities F(D) = D, F^2(D-perp) = D-perp, F(D-tilde) = D-tilde as principal
/// angles, and (mu = +1) the Lagrangian property of D-perp and F(D-perp).
inline std::vector<CheckReport> verify_cor26(const std::vector<SplitData>& splits, bool ambient_nondegenerate,
                                             int mu) {
    if (!ambient_nondegenerate)
        return {inapplicable("cor_2_6_eq_2_8", "ambient nondegeneracy"),
                inapplicable("cor_2_6_lagrangian", "ambient nondegeneracy")};
    MaxTracker angle, lag;
    for (const SplitData& sd : splits) {
        const double a = std::max({detail::span_angle(sd, sd.F * sd.D, sd.D),
                                   detail::span_angle(sd, sd.F * sd.F * sd.Dperp, sd.Dperp),
                                   detail::span_angle(sd, sd.F * sd.Dtilde, sd.Dtilde)});
        angle.update(a, sd.frame.u);
        double l = 0.0;
        for (const Mat* basis : {&sd.Dperp, &sd.FDperp})
            for (Eigen::Index i = 0; i < basis->cols(); ++i)
                for (Eigen::Index j = 0; j < basis->cols(); ++j)
                    l = std::max(l, std::abs(sd.frame.inner(sd.F * basis->col(i), basis->col(j))));
        lag.update(l, sd.frame.u);
    }
    std::vector<CheckReport> out;
    out.push_back(threshold_report("cor_2_6_eq_2_8", angle, kAngleThreshold, "max principal angle in radians"));
    if (mu != 1)
        out.push_back(inapplicable("cor_2_6_lagrangian", "mu = +1"));
    else
        out.push_back(threshold_report("cor_2_6_lagrangian", lag, kLagrangianThreshold));
    return out;
}

/// Projector algebra and F = phi + omega reassembly at every split.
inline CheckReport projector_check(const std::vector<SplitData>& splits) {
    MaxTracker t;
    for (const SplitData& sd : splits) {
        const Mat P = sd.P(), Q = sd.Q();
        const Mat I = Mat::Identity(sd.n(), sd.n());
        double r = std::max({(P + Q - I).cwiseAbs().maxCoeff(), (P * P - P).cwiseAbs().maxCoeff(),
                             (Q * Q - Q).cwiseAbs().maxCoeff(), (P * Q).cwiseAbs().maxCoeff()});
        for (int a = 0; a < sd.n(); ++a) {
            const Vec X = sd.frame.tangent.col(a);
            const PhiOmega po = phi_omega(sd, X);
            r = std::max(r, sd.frame.norm(sd.F * X - po.phi - po.omega));
        }
        t.update(r, sd.frame.u);
    }
    return threshold_report("eq_2_6_projectors", t, kReassemblyThreshold);
}

}  // namespace affinor
