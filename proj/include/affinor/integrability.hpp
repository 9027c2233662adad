#pragma once

// Frobenius integrability of D and D-perp and the equivalence theorems that
// relate it to Nijenhuis tensors, the second fundamental form and Weingarten
// operators.
//
// Theorems quantify over smooth sections, so at every sample point we build
// local frame fields: project the coordinate fields of N onto the target
// distribution, keep the most independent ones (greedy pivoting, frozen at the
// sample), and Gram-Schmidt them with respect to the induced metric. The
// resulting procedural fields are differentiated by central differences.

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affinor/semi_invariant.hpp"
#include "affinor/structure.hpp"

namespace affinor {

inline constexpr double kIntegrableThreshold = 1e-5;
inline constexpr double kNonIntegrableThreshold = 1e-3;
inline constexpr double kTwoPathThreshold38 = 1e-6;
inline constexpr double kTwoPathThreshold = 1e-5;

enum class Target { D, Dperp };

inline std::string_view target_name(Target t) { return t == Target::D ? "D" : "D-perp"; }

/// Projector onto the target distribution acting on parameter components.
inline Mat distribution_projector(const SplitData& sd, Target t) { return t == Target::D ? sd.P_param() : sd.Q_param(); }

struct FrameField {
    Target target = Target::D;
    std::vector<VectorField> fields;  // parameter-space fields
    std::vector<int> pivots;          // coordinate directions used
    std::string provenance;           // "user-declared" or "projected-constant"

    int size() const { return static_cast<int>(fields.size()); }
};

namespace detail {

/// Orthonormalized projections of the pivot coordinate fields at u.
inline Mat projected_frame(const SubmanifoldSpec& S, const Vec& u, Target target, const std::vector<int>& pivots) {
    const SplitData sd = split_tangent(S, u);
    const Mat proj = distribution_projector(sd, target);
    const int n = S.dim;
    const Mat induced = sd.frame.jacobian.transpose() * sd.frame.metric * sd.frame.jacobian;
    Mat cols(n, static_cast<Eigen::Index>(pivots.size()));
    for (std::size_t i = 0; i < pivots.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = proj.col(pivots[i]);
    OrthonormalResult on = gram_schmidt(cols, induced, Mat(), 0.0);
    Vec scale = singular_values(cols);
    const double smax = scale.size() ? scale[0] : 0.0;
    const double smin = scale.size() ? scale[scale.size() - 1] : 0.0;
    if (static_cast<std::size_t>(on.basis.cols()) != pivots.size() || smin < tol::rank_relative * smax)
        throw StructuralError("projected frame for " + std::string(target_name(target)) + " drops rank at u = " +
                              format_point(u));
    return on.basis;
}

}  // namespace detail

/// Frame fields for D or D-perp near `base`, pivots chosen at `base`.
inline FrameField smooth_frame(const SubmanifoldSpec& S, Target target, const Vec& base) {
    const SplitData sd = split_tangent(S, base);
    const int k = target == Target::D ? sd.p : sd.q;
    const int n = S.dim;
    const Mat proj = distribution_projector(sd, target);
    const Mat induced = sd.frame.jacobian.transpose() * sd.frame.metric * sd.frame.jacobian;

    FrameField ff;
    ff.target = target;
    ff.provenance = (target == Target::D && !S.frame_D.empty()) ? "user-declared" : "projected-constant";
    std::vector<Vec> chosen;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_norm = -1.0;
        for (int a = 0; a < n; ++a) {
            if (used[static_cast<std::size_t>(a)]) continue;
            Vec w = proj.col(a);
            for (const Vec& c : chosen) w -= g_inner(induced, c, w) * c;
            const double nrm = g_norm(induced, w);
            if (nrm > best_norm) {
                best_norm = nrm;
                best = a;
            }
        }
        if (best < 0 || best_norm < tol::projected_norm)
            throw StructuralError("cannot select " + std::to_string(k) + " independent projected coordinate fields at u = " +
                                  format_point(base));
        Vec w = proj.col(best);
        for (const Vec& c : chosen) w -= g_inner(induced, c, w) * c;
        chosen.push_back(w / g_norm(induced, w));
        used[static_cast<std::size_t>(best)] = true;
        ff.pivots.push_back(best);
    }
    auto spec = std::make_shared<const SubmanifoldSpec>(S);
    for (int i = 0; i < k; ++i) {
        ff.fields.push_back(VectorField::procedural(n, n, [spec, target, pivots = ff.pivots, i](const Vec& u) -> Vec {
            return detail::projected_frame(*spec, u, target, pivots).col(i);
        }));
    }
    return ff;
}

/// x -> phi(x) V(x) on parameter space.
inline VectorField apply_phi(std::shared_ptr<const SubmanifoldSpec> spec, const VectorField& V) {
    return VectorField::procedural(spec->dim, spec->dim, [spec, V](const Vec& u) -> Vec {
        return split_tangent(*spec, u).phi_param() * V(u);
    });
}

/// N_phi(X, Y) at u in parameter components.
inline Vec nijenhuis_phi(const SubmanifoldSpec& S, const VectorField& X, const VectorField& Y, const Vec& u) {
    auto spec = std::make_shared<const SubmanifoldSpec>(S);
    const Mat phi = split_tangent(S, u).phi_param();
    const VectorField pX = apply_phi(spec, X);
    const VectorField pY = apply_phi(spec, Y);
    return lie_bracket(pX, pY, u) + phi * (phi * lie_bracket(X, Y, u)) - phi * lie_bracket(pX, Y, u) -
           phi * lie_bracket(X, pY, u);
}

/// Field u -> F(f(u)) f_*(X(u)) along N.
inline VectorField apply_ambient_affinor(std::shared_ptr<const SubmanifoldSpec> spec, const VectorField& X) {
    return VectorField::procedural(spec->dim, spec->M().dim, [spec, X](const Vec& u) -> Vec {
        const FrameData fd = frames_at(*spec, u);
        return affinor_at(spec->M(), fd.x) * fd.push(X(u));
    });
}

inline Status integrability_status(double residual) {
    if (residual <= scaled(kIntegrableThreshold)) return Status::pass;
    if (residual >= scaled(kNonIntegrableThreshold)) return Status::fail;
    return Status::indeterminate;
}

/// Frobenius residual of the target distribution at the samples:
/// max |pi_complement [X_i, X_j]| over frame pairs i < j.
inline CheckReport frobenius_residual(const SubmanifoldSpec& S, Target target, const std::vector<Vec>& samples,
                                      std::string id = {}) {
    auto per = parallel_map<double>(samples.size(), [&](std::size_t s) {
        const Vec& u = samples[s];
        const FrameField ff = smooth_frame(S, target, u);
        const SplitData sd = split_tangent(S, u);
        const Mat comp = target == Target::D ? sd.Q_param() : sd.P_param();
        double worst = 0.0;
        for (int i = 0; i < ff.size(); ++i)
            for (int j = i + 1; j < ff.size(); ++j)
                worst = std::max(worst, sd.frame.norm(sd.frame.push(comp * lie_bracket(ff.fields[i], ff.fields[j], u))));
        return worst;
    });
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], samples[i]);
    CheckReport r;
    r.check_id = id.empty() ? "frobenius_" + std::string(target == Target::D ? "D" : "Dperp") : std::move(id);
    r.max_residual = t.value;
    r.threshold = scaled(kIntegrableThreshold);
    r.witness = t.where;
    r.status = integrability_status(t.value);
    r.detail = std::string(target_name(target)) +
               (r.status == Status::pass ? " integrable" : r.status == Status::fail ? " not integrable" : " indeterminate");
    return r;
}

/// Whether the hypotheses used by the theorems hold at the points of N.
struct Hypotheses {
    bool semi_invariant = false;
    bool nondegenerate = false;
    bool parallel = false;
    int mu = 1;
};

inline Hypotheses evaluate_hypotheses(const SubmanifoldSpec& S, const std::vector<Vec>& samples, bool semi_invariant) {
    Hypotheses h;
    h.semi_invariant = semi_invariant;
    h.mu = S.M().mu;
    struct Item {
        bool nondeg;
        double nabla;
    };
    auto per = parallel_map<Item>(samples.size(), [&](std::size_t i) {
        const FrameData fd = frames_at(S, samples[i]);
        return Item{affinor_rank_at(S.M(), fd.x).kernel == 0, nabla_affinor(S.M(), fd.x).max_abs()};
    });
    h.nondegenerate = std::all_of(per.begin(), per.end(), [](const Item& it) { return it.nondeg; });
    h.parallel = std::all_of(per.begin(), per.end(), [](const Item& it) { return it.nabla <= scaled(kParallelThreshold); });
    return h;
}

/// Everything the theorem checks share for one submanifold and sample set.
struct TheoremContext {
    const SubmanifoldSpec* spec = nullptr;
    std::vector<Vec> samples;
    std::vector<SplitData> splits;
    Hypotheses hypotheses;

    const SubmanifoldSpec& S() const { return *spec; }
};

inline TheoremContext make_context(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    TheoremContext ctx;
    ctx.spec = &S;
    ctx.samples = samples;
    ctx.splits = split_samples(S, samples);
    const bool semi = verify_definition21(ctx.splits).passed;
    ctx.hypotheses = evaluate_hypotheses(S, samples, semi);
    return ctx;
}

enum class Verdict { all_hold, none_hold, mismatch, indeterminate, inapplicable };

inline std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::all_hold: return "all-hold";
    case Verdict::none_hold: return "none-hold";
    case Verdict::mismatch: return "MISMATCH";
    case Verdict::indeterminate: return "indeterminate";
    case Verdict::inapplicable: return "inapplicable";
    }
    return "?";
}

struct Condition {
    std::string id;
    std::string description;
    MaxTracker residual;
    bool vacuous = false;

    Status status() const { return vacuous ? Status::pass : integrability_status(residual.value); }
};

/// Outcome of an "equivalent conditions" theorem.
struct EquivalenceVerdict {
    std::string id;
    std::vector<Condition> conditions;
    Verdict verdict = Verdict::inapplicable;
    std::string detail;
    std::vector<CheckReport> identities;  // two-path identities checked alongside

    Status status() const {
        switch (verdict) {
        case Verdict::all_hold:
        case Verdict::none_hold: return Status::pass;
        case Verdict::mismatch: return Status::mismatch;
        case Verdict::indeterminate: return Status::indeterminate;
        case Verdict::inapplicable: return Status::inapplicable;
        }
        return Status::fail;
    }

    std::vector<CheckReport> reports() const {
        std::vector<CheckReport> out;
        for (const Condition& c : conditions) {
            CheckReport r;
            r.check_id = id + "_" + c.id;
            r.status = c.status();
            r.max_residual = c.residual.value;
            r.threshold = scaled(kIntegrableThreshold);
            r.witness = c.residual.where;
            r.detail = c.description + (c.vacuous ? " (vacuous)" : "");
            out.push_back(std::move(r));
        }
        CheckReport v;
        v.check_id = id;
        v.status = status();
        v.max_residual = verdict == Verdict::mismatch ? 1.0 : 0.0;
        v.threshold = 0.0;
        v.detail = "verdict=" + std::string(verdict_name(verdict));
        if (!detail.empty()) v.detail += "; " + detail;
        out.push_back(std::move(v));
        out.insert(out.end(), identities.begin(), identities.end());
        return out;
    }
};

namespace detail {

inline void decide(EquivalenceVerdict& ev) {
    bool any_indeterminate = false, all_pass = true, all_fail = true;
    for (const Condition& c : ev.conditions) {
        const Status s = c.status();
        any_indeterminate = any_indeterminate || s == Status::indeterminate;
        all_pass = all_pass && s == Status::pass;
        all_fail = all_fail && s == Status::fail;
    }
    if (any_indeterminate)
        ev.verdict = Verdict::indeterminate;
    else if (all_pass)
        ev.verdict = Verdict::all_hold;
    else if (all_fail)
        ev.verdict = Verdict::none_hold;
    else {
        ev.verdict = Verdict::mismatch;
        ev.detail = "all hypotheses hold; conditions disagree";
    }
}

inline EquivalenceVerdict gated(std::string id, const std::string& hypothesis) {
    EquivalenceVerdict ev;
    ev.id = std::move(id);
    ev.verdict = Verdict::inapplicable;
    ev.detail = hypothesis + " failed";
    return ev;
}

/// First failed hypothesis among the requested ones, or empty.
inline std::string failed_hypothesis(const Hypotheses& h, bool nondegenerate, bool parallel, bool mu_plus) {
    if (!h.semi_invariant) return "semi-invariance";
    if (nondegenerate && !h.nondegenerate) return "ambient nondegeneracy";
    if (parallel && !h.parallel) return "parallelism";
    if (mu_plus && h.mu != 1) return "mu = +1";
    return {};
}

/// Ambient g-norm of the parameter vector a pushed forward at the split point.
inline double pushed_norm(const SplitData& sd, const Vec& a) { return sd.frame.norm(sd.frame.push(a)); }

inline std::vector<Vec> frame_values(const FrameField& ff, const Vec& u) {
    std::vector<Vec> v;
    for (const auto& f : ff.fields) v.push_back(f(u));
    return v;
}

struct SampleMax {
    std::vector<double> values;
    explicit SampleMax(std::size_t k = 0) : values(k, 0.0) {}
    void bump(std::size_t i, double v) { values[i] = std::max(values[i], v); }
};

inline void collect(std::vector<Condition*> conds, const std::vector<SampleMax>& per, const std::vector<Vec>& samples,
                    std::size_t offset = 0) {
    for (std::size_t s = 0; s < per.size(); ++s)
        for (std::size_t c = 0; c < conds.size(); ++c) conds[c]->residual.update(per[s].values[c + offset], samples[s]);
}

}  // namespace detail

/// D integrable <=> Q N_phi = 0 on D <=> N_F = N_phi on D.
inline EquivalenceVerdict check_theorem31(const TheoremContext& ctx) {
    const auto& h = ctx.hypotheses;
    if (!h.semi_invariant) return detail::gated("thm_3_1", "semi-invariance");
    if (!h.nondegenerate)
        return detail::gated("thm_3_1", "ambient nondegeneracy (not stated in the theorem, used in its proof)");
    const SubmanifoldSpec& S = ctx.S();
    EquivalenceVerdict ev;
    ev.id = "thm_3_1";
    Condition c1{"c1_D_integrable", "|Q[X,Y]| over D-frame pairs", {}, false};
    Condition c2{"c2_Q_Nphi", "|Q N_phi(X,Y)| over D-frame pairs", {}, false};
    Condition c3{"c3_NF_eq_Nphi", "|N_F(X,Y) - N_phi(X,Y)| over D-frame pairs", {}, false};
    auto per = parallel_map<detail::SampleMax>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField ff = smooth_frame(S, Target::D, u);
        const Mat Q = sd.Q_param();
        detail::SampleMax out(4);
        out.values[3] = ff.size() < 2 ? 1.0 : 0.0;
        for (int i = 0; i < ff.size(); ++i)
            for (int j = i + 1; j < ff.size(); ++j) {
                const Vec br = lie_bracket(ff.fields[i], ff.fields[j], u);
                const Vec nphi = nijenhuis_phi(S, ff.fields[i], ff.fields[j], u);
                const Vec nf = nijenhuis_tensor(S.M(), sd.frame.x, sd.frame.push(ff.fields[i](u)),
                                                sd.frame.push(ff.fields[j](u)));
                out.bump(0, detail::pushed_norm(sd, Q * br));
                out.bump(1, detail::pushed_norm(sd, Q * nphi));
                out.bump(2, sd.frame.norm(nf - sd.frame.push(nphi)));
            }
        return out;
    });
    detail::collect({&c1, &c2, &c3}, per, ctx.samples);
    const bool vacuous = std::all_of(per.begin(), per.end(), [](const detail::SampleMax& m) { return m.values[3] > 0.5; });
    c1.vacuous = c2.vacuous = c3.vacuous = vacuous;
    ev.conditions = {c1, c2, c3};
    detail::decide(ev);
    return ev;
}

/// D-perp integrable <=> N_phi = 0 on D-perp, plus the identity
/// N_phi(X, Y) = F^2 P [X, Y] for X, Y in D-perp.
inline EquivalenceVerdict check_theorem33(const TheoremContext& ctx) {
    const SubmanifoldSpec& S = ctx.S();
    // The identity does not depend on nondegeneracy; evaluate it whenever the split exists.
    auto per = parallel_map<detail::SampleMax>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField ff = smooth_frame(S, Target::Dperp, u);
        const Mat P = sd.P_param();
        detail::SampleMax out(4);
        out.values[3] = ff.size() < 2 ? 1.0 : 0.0;
        for (int i = 0; i < ff.size(); ++i)
            for (int j = i + 1; j < ff.size(); ++j) {
                const Vec br = lie_bracket(ff.fields[i], ff.fields[j], u);
                const Vec nphi = nijenhuis_phi(S, ff.fields[i], ff.fields[j], u);
                out.bump(0, detail::pushed_norm(sd, P * br));
                out.bump(1, detail::pushed_norm(sd, nphi));
                out.bump(2, sd.frame.norm(sd.frame.push(nphi) - sd.F * (sd.F * sd.frame.push(P * br))));
            }
        return out;
    });
    MaxTracker identity;
    for (std::size_t s = 0; s < per.size(); ++s) identity.update(per[s].values[2], ctx.samples[s]);
    const bool vacuous = std::all_of(per.begin(), per.end(), [](const detail::SampleMax& m) { return m.values[3] > 0.5; });
    CheckReport id38 = threshold_report("eq_3_8_two_path", identity, kTwoPathThreshold38,
                                        vacuous ? "N_phi vs F^2 P[X,Y] (vacuous: rank D-perp < 2)" : "N_phi vs F^2 P[X,Y]");

    const auto& h = ctx.hypotheses;
    if (!h.semi_invariant) {
        auto ev = detail::gated("thm_3_3", "semi-invariance");
        return ev;
    }
    EquivalenceVerdict ev;
    if (!h.nondegenerate) {
        ev = detail::gated("thm_3_3", "ambient nondegeneracy");
        ev.identities.push_back(id38);
        return ev;
    }
    ev.id = "thm_3_3";
    Condition c1{"c1_Dperp_integrable", "|P[X,Y]| over D-perp-frame pairs", {}, vacuous};
    Condition c2{"c2_Nphi_Dperp", "|N_phi(X,Y)| over D-perp-frame pairs", {}, vacuous};
    detail::collect({&c1, &c2}, per, ctx.samples);
    ev.conditions = {c1, c2};
    detail::decide(ev);
    ev.identities.push_back(id38);
    return ev;
}

/// A_{FX} Y - A_{FY} X = phi [X, Y] for X, Y in D-perp.
inline CheckReport check_prop42(const TheoremContext& ctx) {
    const std::string fail = detail::failed_hypothesis(ctx.hypotheses, true, true, false);
    if (!fail.empty()) return inapplicable("prop_4_2", fail);
    const SubmanifoldSpec& S = ctx.S();
    auto spec = std::make_shared<const SubmanifoldSpec>(S);
    bool vacuous = true;
    auto per = parallel_map<double>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField ff = smooth_frame(S, Target::Dperp, u);
        const Mat P = sd.P_param();
        double worst = 0.0;
        for (int i = 0; i < ff.size(); ++i) {
            const VectorField FXi = apply_ambient_affinor(spec, ff.fields[i]);
            for (int j = i + 1; j < ff.size(); ++j) {
                const VectorField FXj = apply_ambient_affinor(spec, ff.fields[j]);
                const Vec a1 = weingarten_operator(sd.frame, FXi, ff.fields[j](u)).shape;
                const Vec a2 = weingarten_operator(sd.frame, FXj, ff.fields[i](u)).shape;
                const Vec br = lie_bracket(ff.fields[i], ff.fields[j], u);
                const Vec phi_br = sd.F * sd.frame.push(P * br);
                worst = std::max(worst, sd.frame.norm(a1 - a2 - phi_br));
            }
        }
        return worst;
    });
    for (const SplitData& sd : ctx.splits) vacuous = vacuous && sd.q < 2;
    MaxTracker t;
    for (std::size_t i = 0; i < per.size(); ++i) t.update(per[i], ctx.samples[i]);
    return threshold_report("prop_4_2", t, kTwoPathThreshold,
                            vacuous ? "A_FX Y - A_FY X - phi[X,Y] (vacuous: rank D-perp < 2)" : "A_FX Y - A_FY X - phi[X,Y]");
}

/// D-perp is integrable for nondegenerate, parallel, mu = +1 structures. A
/// violation contradicts the theorem and is reported as MISMATCH.
inline CheckReport check_theorem44(const TheoremContext& ctx) {
    const std::string fail = detail::failed_hypothesis(ctx.hypotheses, true, true, true);
    if (!fail.empty()) return inapplicable("thm_4_4_dperp_integrable", fail);
    CheckReport r = frobenius_residual(ctx.S(), Target::Dperp, ctx.samples, "thm_4_4_dperp_integrable");
    if (r.status == Status::fail) {
        r.status = Status::mismatch;
        r.detail = "D-perp not integrable although all hypotheses hold";
    }
    return r;
}

/// D integrable <=> g(h(X, phi Y) - h(Y, phi X), F Z) = 0, with the identity
/// h(X, phi Y) - h(Y, phi X) = omega [X, Y].
inline EquivalenceVerdict check_theorem46(const TheoremContext& ctx) {
    const std::string fail = detail::failed_hypothesis(ctx.hypotheses, true, true, false);
    if (!fail.empty()) return detail::gated("thm_4_6", fail);
    const SubmanifoldSpec& S = ctx.S();
    auto per = parallel_map<detail::SampleMax>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField fd = smooth_frame(S, Target::D, u);
        const FrameField fz = smooth_frame(S, Target::Dperp, u);
        const auto X = detail::frame_values(fd, u);
        const auto Z = detail::frame_values(fz, u);
        const Mat Q = sd.Q_param();
        const Mat phi = sd.phi_param();
        detail::SampleMax out(3);
        for (int i = 0; i < fd.size(); ++i)
            for (int j = i + 1; j < fd.size(); ++j) {
                const Vec br = lie_bracket(fd.fields[i], fd.fields[j], u);
                const Vec commutator = second_fundamental_form_at(sd.frame, X[i], phi * X[j]) -
                                       second_fundamental_form_at(sd.frame, X[j], phi * X[i]);
                out.bump(0, detail::pushed_norm(sd, Q * br));
                for (const Vec& z : Z)
                    out.bump(1, std::abs(sd.frame.inner(commutator, sd.F * sd.frame.push(z))));
                const Vec omega_br = sd.F * sd.frame.push(Q * br);
                out.bump(2, sd.frame.norm(commutator - omega_br));
            }
        return out;
    });
    EquivalenceVerdict ev;
    ev.id = "thm_4_6";
    bool no_pairs = true, no_z = true;
    for (const SplitData& sd : ctx.splits) {
        no_pairs = no_pairs && sd.p < 2;
        no_z = no_z && sd.q == 0;
    }
    Condition c1{"c1_D_integrable", "|Q[X,Y]| over D-frame pairs", {}, no_pairs};
    Condition c2{"c2_eq_4_7", "|g(h(X,phi Y) - h(Y,phi X), F Z)|", {}, no_pairs || no_z};
    detail::collect({&c1, &c2}, per, ctx.samples);
    ev.conditions = {c1, c2};
    detail::decide(ev);
    if (no_z) ev.detail = "no D-perp directions; D-integrability stands alone";
    MaxTracker identity;
    for (std::size_t s = 0; s < per.size(); ++s) identity.update(per[s].values[2], ctx.samples[s]);
    ev.identities.push_back(threshold_report("eq_4_10_two_path", identity, kTwoPathThreshold,
                                             "h(X,phi Y) - h(Y,phi X) vs omega[X,Y]"));
    return ev;
}

/// (i) nabla_Y Z in D-perp, (ii) h(X, Y) in D-tilde, (iii) A_V Y in D-perp,
/// with the chain g(nabla_Y Z, F X) = mu g(h(X, Y), F Z).
inline EquivalenceVerdict check_theorem48(const TheoremContext& ctx) {
    const std::string fail = detail::failed_hypothesis(ctx.hypotheses, true, true, false);
    if (!fail.empty()) return detail::gated("thm_4_8", fail);
    const SubmanifoldSpec& S = ctx.S();
    const CheckReport dperp = frobenius_residual(S, Target::Dperp, ctx.samples);
    if (dperp.status != Status::pass) return detail::gated("thm_4_8", "D-perp integrability");
    auto spec = std::make_shared<const SubmanifoldSpec>(S);
    const int mu = S.M().mu;
    auto per = parallel_map<detail::SampleMax>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField fd = smooth_frame(S, Target::D, u);
        const FrameField fz = smooth_frame(S, Target::Dperp, u);
        const auto X = detail::frame_values(fd, u);
        const auto Y = detail::frame_values(fz, u);
        detail::SampleMax out(4);
        for (int a = 0; a < fz.size(); ++a)
            for (int b = 0; b < fz.size(); ++b) {
                const Vec nabla = induced_covariant_derivative(sd.frame, Y[a], fz.fields[b]);
                out.bump(0, sd.frame.norm(sd.project(sd.D, nabla)));
                for (const Vec& x : X) {
                    const double lhs = sd.frame.inner(nabla, sd.F * sd.frame.push(x));
                    const double rhs = mu * sd.frame.inner(second_fundamental_form_at(sd.frame, x, Y[a]),
                                                           sd.F * sd.frame.push(Y[b]));
                    out.bump(3, std::abs(lhs - rhs));
                }
            }
        for (const Vec& x : X)
            for (const Vec& y : Y)
                out.bump(1, sd.frame.norm(sd.project(sd.FDperp, second_fundamental_form_at(sd.frame, x, y))));
        for (int c = 0; c < fz.size(); ++c) {
            const VectorField V = apply_ambient_affinor(spec, fz.fields[c]);
            for (const Vec& y : Y) out.bump(2, sd.frame.norm(sd.project(sd.D, weingarten_operator(sd.frame, V, y).shape)));
        }
        return out;
    });
    bool no_dperp = true, no_mixed = true;
    for (const SplitData& sd : ctx.splits) {
        no_dperp = no_dperp && sd.q == 0;
        no_mixed = no_mixed && (sd.q == 0 || sd.p == 0);
    }
    EquivalenceVerdict ev;
    ev.id = "thm_4_8";
    Condition c1{"i_totally_geodesic", "|pi_D(nabla_Y Z)| for Y, Z in D-perp", {}, no_dperp};
    Condition c2{"ii_h_mixed_in_Dtilde", "|pi_F(D-perp) h(X,Y)| for X in D, Y in D-perp", {}, no_mixed};
    Condition c3{"iii_A_V_invariant", "|pi_D(A_V Y)| for V in F(D-perp), Y in D-perp", {}, no_dperp};
    detail::collect({&c1, &c2, &c3}, per, ctx.samples);
    ev.conditions = {c1, c2, c3};
    detail::decide(ev);
    MaxTracker chain;
    for (std::size_t s = 0; s < per.size(); ++s) chain.update(per[s].values[3], ctx.samples[s]);
    ev.identities.push_back(
        threshold_report("eq_4_14_chain", chain, kTwoPathThreshold, "g(nabla_Y Z, F X) vs mu g(h(X,Y), F Z)"));
    return ev;
}

/// D integrable with totally geodesic leaves <=> h(X, Y) in D-tilde for X, Y in D.
inline EquivalenceVerdict check_theorem410(const TheoremContext& ctx) {
    const std::string fail = detail::failed_hypothesis(ctx.hypotheses, true, true, false);
    if (!fail.empty()) return detail::gated("thm_4_10", fail);
    const SubmanifoldSpec& S = ctx.S();
    auto per = parallel_map<detail::SampleMax>(ctx.samples.size(), [&](std::size_t s) {
        const Vec& u = ctx.samples[s];
        const SplitData& sd = ctx.splits[s];
        const FrameField fd = smooth_frame(S, Target::D, u);
        const auto X = detail::frame_values(fd, u);
        const Mat Q = sd.Q_param();
        detail::SampleMax out(2);
        for (int i = 0; i < fd.size(); ++i) {
            for (int j = 0; j < fd.size(); ++j) {
                if (j > i) out.bump(0, detail::pushed_norm(sd, Q * lie_bracket(fd.fields[i], fd.fields[j], u)));
                const Vec nabla = induced_covariant_derivative(sd.frame, X[i], fd.fields[j]);
                out.bump(0, sd.frame.norm(sd.project(sd.Dperp, nabla)));
                if (j >= i)
                    out.bump(1, sd.frame.norm(sd.project(sd.FDperp, second_fundamental_form_at(sd.frame, X[i], X[j]))));
            }
        }
        return out;
    });
    bool no_d = true, no_dperp = true;
    for (const SplitData& sd : ctx.splits) {
        no_d = no_d && sd.p == 0;
        no_dperp = no_dperp && sd.q == 0;
    }
    EquivalenceVerdict ev;
    ev.id = "thm_4_10";
    Condition left{"left_D_totally_geodesic", "D integrable and |pi_D-perp(nabla_X U)| for X, U in D", {}, no_d};
    Condition right{"right_eq_4_15", "|pi_F(D-perp) h(X,Y)| for X, Y in D", {}, no_d || no_dperp};
    detail::collect({&left, &right}, per, ctx.samples);
    ev.conditions = {left, right};
    detail::decide(ev);
    return ev;
}

// Convenience overloads taking the spec and samples directly.
inline EquivalenceVerdict check_theorem31(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem31(make_context(S, samples));
}
inline EquivalenceVerdict check_theorem33(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem33(make_context(S, samples));
}
inline CheckReport check_prop42(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_prop42(make_context(S, samples));
}
inline CheckReport check_theorem44(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem44(make_context(S, samples));
}
inline EquivalenceVerdict check_theorem46(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem46(make_context(S, samples));
}
inline EquivalenceVerdict check_theorem48(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem48(make_context(S, samples));
}
inline EquivalenceVerdict check_theorem410(const SubmanifoldSpec& S, const std::vector<Vec>& samples) {
    return check_theorem410(make_context(S, samples));
}

}  // namespace affinor
