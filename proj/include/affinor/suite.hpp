#pragma once

// Orchestration of every check in a fixed order, report emission and the
// exit-code contract.

#include <cctype>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affinor/integrability.hpp"
#include "affinor/semi_invariant.hpp"
#include "affinor/structure.hpp"

namespace affinor {

struct SuiteOptions {
    int points = kDefaultPoints;
    std::uint64_t seed = kDefaultSeed;
    double tol = 1.0;                 // multiplier on every pass threshold
    std::vector<std::string> checks;  // id prefixes; empty selects everything
};

namespace detail {

inline bool selected(const SuiteOptions& o, const std::string& id) {
    if (o.checks.empty()) return true;
    for (const auto& f : o.checks)
        if (id.rfind(f, 0) == 0) return true;
    return false;
}

/// A group runs if a filter selects one of its ids or narrows inside it.
inline bool group_selected(const SuiteOptions& o, std::initializer_list<std::string_view> ids) {
    if (o.checks.empty()) return true;
    for (const auto& f : o.checks)
        for (auto id : ids)
            if (std::string_view(f).substr(0, id.size()) == id || id.substr(0, f.size()) == f) return true;
    return false;
}

class Runner {
public:
    explicit Runner(const SuiteOptions& o) : options_(o) {}

    void run(std::initializer_list<std::string_view> ids, const std::function<std::vector<CheckReport>()>& body) {
        if (!group_selected(options_, ids)) return;
        std::vector<CheckReport> got;
        try {
            got = body();
        } catch (const std::exception& e) {
            for (auto id : ids) {
                CheckReport r;
                r.check_id = std::string(id);
                r.status = Status::fail;
                r.detail = std::string("error: ") + e.what();
                got.push_back(std::move(r));
            }
        }
        for (auto& r : got)
            if (selected(options_, r.check_id)) out_.push_back(std::move(r));
    }

    std::vector<CheckReport> take() { return std::move(out_); }

private:
    const SuiteOptions& options_;
    std::vector<CheckReport> out_;
};

inline std::vector<CheckReport> one(CheckReport r) { return {std::move(r)}; }

}  // namespace detail

/// Runs every applicable check; a failing check never aborts the others.
inline std::vector<CheckReport> run_suite(const ManifoldSpec& M, const SubmanifoldSpec* S, const SuiteOptions& options) {
    if (options.points <= 0) throw PreconditionError("points must be positive");
    if (!(options.tol > 0.0)) throw PreconditionError("tol must be positive");
    ScopedToleranceScale scale(options.tol);
    detail::Runner run(options);

    const std::vector<Vec> xs = sample_points(M.domain, options.points, options.seed);
    run.run({"eq_1_1_compatibility"}, [&] { return detail::one(check_compatibility(M, xs)); });
    run.run({"def_1_1_nondegeneracy"}, [&] { return detail::one(check_nondegeneracy(M, xs).report); });
    run.run({"prop_1_3_fundamental_form"}, [&] { return detail::one(check_fundamental_form(M, xs)); });
    run.run({"eq_4_1_parallel"}, [&] { return detail::one(check_parallel(M, xs)); });
    run.run({"ex_1_2_family"}, [&] { return detail::one(classify_structure(M, xs).report); });
    if (!S) return run.take();

    const std::vector<Vec> us = sample_points(S->domain, options.points, options.seed);
    run.run({"frames_orthonormal"}, [&] { return detail::one(frame_check(*S, us)); });
    run.run({"eq_1_4_duality"}, [&] { return detail::one(duality_check(*S, us)); });
    run.run({"h_symmetry"}, [&] { return detail::one(h_symmetry_check(*S, us)); });
    run.run({"totally_geodesic"}, [&] { return detail::one(totally_geodesic_check(*S, us)); });

    std::optional<TheoremContext> ctx;
    std::optional<Definition21Result> def21;
    try {
        ctx = make_context(*S, us);
        def21 = verify_definition21(ctx->splits);
    } catch (const std::exception& e) {
        CheckReport r;
        r.check_id = "def_2_1";
        r.status = Status::fail;
        r.detail = std::string("error: ") + e.what();
        std::vector<CheckReport> out = run.take();
        if (detail::selected(options, r.check_id)) out.push_back(std::move(r));
        return out;
    }
    const auto& splits = ctx->splits;
    run.run({"def_2_1_i_D_invariant", "def_2_1_ii_Dperp_anti_invariant", "def_2_1_iii_F2Dperp_distribution"},
            [&] { return def21->reports; });
    run.run({"eq_2_6_projectors"}, [&] { return detail::one(projector_check(splits)); });
    run.run({"prop_2_5_iv_phi_structure", "prop_2_5_v_F2Dperp_in_Dperp", "prop_2_5_vi_Dtilde_invariant"},
            [&] { return verify_prop25(splits, M.mu); });
    run.run({"cor_2_6_eq_2_8", "cor_2_6_lagrangian"},
            [&] { return verify_cor26(splits, ctx->hypotheses.nondegenerate, M.mu); });
    run.run({"def_2_1_classification"}, [&] { return detail::one(classify_submanifold(splits, *def21).report); });

    run.run({"thm_3_1"}, [&] { return check_theorem31(*ctx).reports(); });
    run.run({"thm_3_3", "eq_3_8_two_path"}, [&] { return check_theorem33(*ctx).reports(); });
    run.run({"prop_4_2"}, [&] { return detail::one(check_prop42(*ctx)); });
    run.run({"thm_4_4_dperp_integrable"}, [&] { return detail::one(check_theorem44(*ctx)); });
    run.run({"thm_4_6", "eq_4_10_two_path"}, [&] { return check_theorem46(*ctx).reports(); });
    run.run({"thm_4_8", "eq_4_14_chain"}, [&] { return check_theorem48(*ctx).reports(); });
    run.run({"thm_4_10"}, [&] { return check_theorem410(*ctx).reports(); });
    return run.take();
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitUnresolved = 3;

inline int exit_code(const std::vector<CheckReport>& reports) {
    bool unresolved = false;
    for (const auto& r : reports) {
        if (r.status == Status::fail || r.status == Status::mismatch) return kExitFail;
        unresolved = unresolved || r.status == Status::indeterminate || r.status == Status::rank_ambiguous;
    }
    return unresolved ? kExitUnresolved : kExitOk;
}

/// Context echoed into JSON reports.
struct ReportHeader {
    std::optional<std::string> fixture;
    std::optional<SuiteOptions> options;
};

inline nlohmann::ordered_json report_json(const CheckReport& r) {
    nlohmann::ordered_json j;
    j["check_id"] = r.check_id;
    j["status"] = std::string(status_name(r.status));
    j["max_residual"] = r.max_residual;
    j["threshold"] = r.threshold;
    if (r.witness) {
        auto w = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < r.witness->size(); ++i) w.push_back((*r.witness)[i]);
        j["witness"] = std::move(w);
    } else {
        j["witness"] = nullptr;
    }
    j["detail"] = r.detail;
    return j;
}

inline std::string format_json(const std::vector<CheckReport>& reports, const ReportHeader& header = {}) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    if (header.fixture) j["fixture"] = *header.fixture;
    if (header.options) {
        nlohmann::ordered_json o;
        o["points"] = header.options->points;
        o["seed"] = header.options->seed;
        o["tol"] = header.options->tol;
        o["checks"] = header.options->checks;
        j["options"] = std::move(o);
    }
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) j["checks"].push_back(report_json(r));
    return j.dump();
}

inline std::string format_text(const std::vector<CheckReport>& reports) {
    std::string out;
    for (const auto& r : reports) {
        std::string status(status_name(r.status));
        for (char& c : status) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        out += r.check_id + " " + status + " residual=" + format_real(r.max_residual) + " thr=" + format_real(r.threshold);
        if (!r.detail.empty()) out += " | " + r.detail;
        out += "\n";
    }
    return out;
}

enum class ReportFormat { text, json };

inline void emit_report(const std::vector<CheckReport>& reports, ReportFormat format, std::ostream& out,
                        const ReportHeader& header = {}) {
    out << (format == ReportFormat::json ? format_json(reports, header) + "\n" : format_text(reports));
    out.flush();
    if (!out) throw std::runtime_error("failed to write report");
}

}  // namespace affinor
