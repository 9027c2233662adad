#pragma once

// Verification and classification of (g, F, mu)-structures.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affinor/chart.hpp"

namespace affinor {

inline constexpr double kCompatibilityThreshold = 1e-10;
inline constexpr double kSkewThreshold = 1e-12;
inline constexpr double kParallelThreshold = 1e-8;
inline constexpr double kFamilyThreshold = 1e-8;

inline void require_samples(const std::vector<Vec>& samples) {
    if (samples.empty()) throw PreconditionError("sample set is empty");
}

/// max_x |G F + mu F^T G| (spectral norm); the adjoint form
/// |G^-1 F^T G + mu F| is reported in the detail.
inline CheckReport check_compatibility(const ManifoldSpec& M, const std::vector<Vec>& samples) {
    require_samples(samples);
    struct Item {
        double residual, adjoint, cond;
    };
    auto per = parallel_map<Item>(samples.size(), [&](std::size_t i) {
        const Mat G = metric_at(M, samples[i]);
        const Mat F = affinor_at(M, samples[i]);
        Vec sv = singular_values(G);
        return Item{spectral_norm(G * F + M.mu * F.transpose() * G),
                    spectral_norm(G.inverse() * F.transpose() * G + M.mu * F), sv[0] / sv[sv.size() - 1]};
    });
    MaxTracker res, adj;
    double cond = 1.0;
    for (std::size_t i = 0; i < per.size(); ++i) {
        res.update(per[i].residual, samples[i]);
        adj.update(per[i].adjoint, samples[i]);
        cond = std::max(cond, per[i].cond);
    }
    return threshold_report("eq_1_1_compatibility", res, kCompatibilityThreshold,
                            "adjoint residual |G^-1 F^T G + mu F| = " + format_real(adj.value) +
                                ", max cond(G) = " + format_real(cond));
}

struct NondegeneracyResult {
    CheckReport report;
    bool nondegenerate = true;
    double min_singular_value = 0.0;
    int kernel_dim = 0;  // largest pointwise kernel dimension
};

struct PointRank {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int kernel = 0;
};

inline PointRank affinor_rank_at(const ManifoldSpec& M, const Vec& x) {
    Vec sv = singular_values(affinor_at(M, x));
    PointRank r;
    r.sigma_max = sv[0];
    r.sigma_min = sv[sv.size() - 1];
    const double cut = std::max(tol::rank_relative * r.sigma_max, tol::rank_floor);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] < cut) ++r.kernel;
    return r;
}

/// Nondegenerate iff sigma_min >= max(1e-8 sigma_max, 1e-12) at every sample.
/// The residual is 1 - sigma_min / sigma_max, so a pass means the relative
/// smallest singular value stayed above 1e-8.
inline NondegeneracyResult check_nondegeneracy(const ManifoldSpec& M, const std::vector<Vec>& samples) {
    require_samples(samples);
    auto per = parallel_map<PointRank>(samples.size(), [&](std::size_t i) { return affinor_rank_at(M, samples[i]); });
    NondegeneracyResult out;
    MaxTracker degeneracy;
    std::set<int> kernels;
    out.min_singular_value = per.front().sigma_min;
    for (std::size_t i = 0; i < per.size(); ++i) {
        const PointRank& p = per[i];
        degeneracy.update(p.sigma_max > 0.0 ? 1.0 - p.sigma_min / p.sigma_max : 1.0, samples[i]);
        out.min_singular_value = std::min(out.min_singular_value, p.sigma_min);
        out.kernel_dim = std::max(out.kernel_dim, p.kernel);
        kernels.insert(p.kernel);
    }
    out.nondegenerate = out.kernel_dim == 0;
    CheckReport& r = out.report;
    r.check_id = "def_1_1_nondegeneracy";
    r.max_residual = degeneracy.value;
    r.threshold = 1.0 - tol::rank_relative;
    r.witness = degeneracy.where;
    r.status = out.nondegenerate ? Status::pass : Status::fail;
    if (out.nondegenerate) {
        r.detail = "nondegenerate; min singular value " + format_real(out.min_singular_value);
    } else {
        r.detail = "degenerate; kernel dimension " + std::to_string(out.kernel_dim);
        if (kernels.size() > 1) r.detail += " (varies across samples)";
    }
    return out;
}

struct FundamentalForm {
    Mat omega;           // omega(i, j) = g(F e_i, e_j)
    double skewness = 0.0;
    RankDecision rank;
    bool nondegenerate = false;
};

inline FundamentalForm fundamental_form(const ManifoldSpec& M, const Vec& x) {
    if (M.mu != 1) throw PreconditionError("fundamental form requires mu = +1");
    const Mat G = metric_at(M, x);
    const Mat F = affinor_at(M, x);
    FundamentalForm out;
    out.omega = F.transpose() * G;
    out.skewness = (out.omega + out.omega.transpose()).cwiseAbs().maxCoeff();
    out.rank = decide_rank(out.omega);
    out.nondegenerate = out.rank.rank == M.dim;
    return out;
}

/// Skewness of Omega and the equivalence (Omega nondegenerate everywhere) <=>
/// (F nondegenerate everywhere); nondegeneracy forces even dimension.
inline CheckReport check_fundamental_form(const ManifoldSpec& M, const std::vector<Vec>& samples) {
    if (M.mu != 1) return inapplicable("prop_1_3_fundamental_form", "mu = +1");
    require_samples(samples);
    struct Item {
        double skew;
        int omega_rank;
        bool omega_nondeg, f_nondeg;
    };
    auto per = parallel_map<Item>(samples.size(), [&](std::size_t i) {
        FundamentalForm ff = fundamental_form(M, samples[i]);
        return Item{ff.skewness, ff.rank.rank, ff.nondegenerate, affinor_rank_at(M, samples[i]).kernel == 0};
    });
    MaxTracker skew;
    bool omega_all = true, f_all = true;
    int min_rank = M.dim;
    for (std::size_t i = 0; i < per.size(); ++i) {
        skew.update(per[i].skew, samples[i]);
        omega_all = omega_all && per[i].omega_nondeg;
        f_all = f_all && per[i].f_nondeg;
        min_rank = std::min(min_rank, per[i].omega_rank);
    }
    const bool even_ok = !omega_all || M.dim % 2 == 0;
    const bool consistent = omega_all == f_all && even_ok;
    CheckReport r = threshold_report("prop_1_3_fundamental_form", skew, kSkewThreshold);
    if (omega_all)
        r.detail = "Omega nondegenerate (almost symplectic), m = " + std::to_string(M.dim) +
                   (M.dim % 2 == 0 ? " even" : " odd");
    else
        r.detail = "Omega degenerate, min rank " + std::to_string(min_rank) + " of " + std::to_string(M.dim);
    r.detail += f_all ? "; F nondegenerate" : "; F degenerate";
    r.detail += consistent ? "; equivalence consistent" : "; equivalence violated";
    if (!consistent) r.status = Status::mismatch;
    return r;
}

/// max |(nabla F)^i_jk| over samples; pass marks the structure parallel.
inline CheckReport check_parallel(const ManifoldSpec& M, const std::vector<Vec>& samples) {
    require_samples(samples);
    auto per = parallel_map<double>(samples.size(), [&](std::size_t i) { return nabla_affinor(M, samples[i]).max_abs(); });
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], samples[i]);
    CheckReport r = threshold_report("eq_4_1_parallel", t, kParallelThreshold);
    r.detail = r.status == Status::pass ? "parallel" : "not parallel";
    return r;
}

enum class Family { almost_hermitian_like, almost_product_like, contact_like_degenerate, generic };

inline std::string_view family_name(Family f) {
    switch (f) {
    case Family::almost_hermitian_like: return "almost-Hermitian-like";
    case Family::almost_product_like: return "almost-product-like";
    case Family::contact_like_degenerate: return "contact-like-degenerate";
    case Family::generic: return "generic";
    }
    return "?";
}

struct StructureVerdict {
    bool compatible = false;
    double compatibility_residual = 0.0;
    bool nondegenerate = false;
    double min_singular_value = 0.0;
    int kernel_dim = 0;
    bool parallel = false;
    double parallel_residual = 0.0;
    Family family = Family::generic;
    std::optional<bool> fundamental_form_ok;  // empty when mu = -1
    CheckReport report;
};

inline StructureVerdict classify_structure(const ManifoldSpec& M, const std::vector<Vec>& samples) {
    require_samples(samples);
    StructureVerdict v;
    CheckReport compat = check_compatibility(M, samples);
    v.compatible = compat.status == Status::pass;
    v.compatibility_residual = compat.max_residual;
    NondegeneracyResult nd = check_nondegeneracy(M, samples);
    v.nondegenerate = nd.nondegenerate;
    v.min_singular_value = nd.min_singular_value;
    v.kernel_dim = nd.kernel_dim;
    CheckReport par = check_parallel(M, samples);
    v.parallel = par.status == Status::pass;
    v.parallel_residual = par.max_residual;
    if (M.mu == 1) v.fundamental_form_ok = check_fundamental_form(M, samples).status == Status::pass;

    struct Item {
        double square_plus, square_minus, cubic;
        int kernel;
    };
    auto per = parallel_map<Item>(samples.size(), [&](std::size_t i) {
        const Mat F = affinor_at(M, samples[i]);
        const Mat I = Mat::Identity(M.dim, M.dim);
        const Mat F2 = F * F;
        return Item{spectral_norm(F2 + I), spectral_norm(F2 - I), spectral_norm(F2 * F + F),
                    affinor_rank_at(M, samples[i]).kernel};
    });
    double plus = 0.0, minus = 0.0, cubic = 0.0;
    bool kernel_one = true;
    for (const Item& it : per) {
        plus = std::max(plus, it.square_plus);
        minus = std::max(minus, it.square_minus);
        cubic = std::max(cubic, it.cubic);
        kernel_one = kernel_one && it.kernel == 1;
    }
    double residual = 0.0;
    if (M.mu == 1 && plus <= scaled(kFamilyThreshold)) {
        v.family = Family::almost_hermitian_like;
        residual = plus;
    } else if (M.mu == -1 && minus <= scaled(kFamilyThreshold)) {
        v.family = Family::almost_product_like;
        residual = minus;
    } else if (M.mu == 1 && kernel_one && cubic <= scaled(kFamilyThreshold)) {
        v.family = Family::contact_like_degenerate;
        residual = cubic;
    }
    v.report.check_id = "ex_1_2_family";
    v.report.status = v.compatible ? Status::pass : Status::fail;
    v.report.max_residual = residual;
    v.report.threshold = scaled(kFamilyThreshold);
    v.report.detail = "family=" + std::string(family_name(v.family));
    if (!v.compatible) v.report.detail += "; compatibility failed";
    return v;
}

}  // namespace affinor
