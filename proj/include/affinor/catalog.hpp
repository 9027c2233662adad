#pragma once

// Built-in fixtures. Each entry carries the outcomes it is expected to
// produce; the acceptance suite is driven from these tables.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affinor/semi_invariant.hpp"
#include "affinor/structure.hpp"

namespace affinor {

struct ExpectedCheck {
    std::string id;
    Status status = Status::pass;
    std::string detail;  // substring that must appear in the report detail; may be empty
};

struct FixtureExpectation {
    bool nondegenerate = true;
    int kernel_dim = 0;
    bool parallel = true;
    Family family = Family::generic;
    // Submanifold part; label empty when the fixture has no submanifold.
    std::string label;
    int p = -1, q = -1, dtilde = -1;
    std::vector<ExpectedCheck> checks;
};

struct FixtureEntry {
    std::string name;
    std::string description;
    std::shared_ptr<const ManifoldSpec> manifold;
    std::optional<SubmanifoldSpec> submanifold;
    FixtureExpectation expected;
};

class UnknownFixture : public std::invalid_argument {
public:
    explicit UnknownFixture(const std::string& name) : std::invalid_argument("unknown fixture '" + name + "'") {}
};

namespace detail {

inline std::vector<Expression> matrix_exprs(const std::vector<std::vector<std::string>>& rows, std::size_t arity) {
    std::vector<Expression> out;
    for (const auto& row : rows)
        for (const auto& s : row) out.push_back(parse(s, arity));
    return out;
}

inline std::vector<std::vector<std::string>> identity_rows(int m) {
    std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(m), std::vector<std::string>(m, "0"));
    for (int i = 0; i < m; ++i) rows[i][i] = "1";
    return rows;
}

inline Domain box(int dim, double lo, double hi) { return Domain(static_cast<std::size_t>(dim), Interval{lo, hi}); }

inline std::shared_ptr<const ManifoldSpec> make_manifold(std::string name, int dim, int mu,
                                                        const std::vector<std::vector<std::string>>& affinor) {
    auto M = std::make_shared<ManifoldSpec>();
    M->name = std::move(name);
    M->dim = dim;
    M->mu = mu;
    M->metric = matrix_exprs(identity_rows(dim), static_cast<std::size_t>(dim));
    M->affinor = matrix_exprs(affinor, static_cast<std::size_t>(dim));
    M->domain = box(dim, -1.0, 1.0);
    return M;
}

inline SubmanifoldSpec make_submanifold(std::string name, std::shared_ptr<const ManifoldSpec> ambient, int dim,
                                        const std::vector<std::string>& embedding, Domain domain) {
    SubmanifoldSpec S;
    S.name = std::move(name);
    S.dim = dim;
    S.ambient = std::move(ambient);
    for (const auto& e : embedding) S.embedding.push_back(parse(e, static_cast<std::size_t>(dim), 'u'));
    S.domain = std::move(domain);
    return S;
}

inline std::shared_ptr<const ManifoldSpec> kaehler_r4() {
    return make_manifold("kaehler_r4", 4, 1,
                         {{"0", "-1", "0", "0"}, {"1", "0", "0", "0"}, {"0", "0", "0", "-1"}, {"0", "0", "1", "0"}});
}

inline std::shared_ptr<const ManifoldSpec> product_r3() {
    return make_manifold("product_r3", 3, -1, {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "-1"}});
}

inline std::shared_ptr<const ManifoldSpec> cosymplectic_r5() {
    return make_manifold("cosymplectic_r5", 5, 1,
                         {{"0", "-1", "0", "0", "0"},
                          {"1", "0", "0", "0", "0"},
                          {"0", "0", "0", "-1", "0"},
                          {"0", "0", "1", "0", "0"},
                          {"0", "0", "0", "0", "0"}});
}

// Rescaling the first complex line by a non-constant factor keeps F skew under
// g = I, hence compatible, but breaks parallelism.
inline std::shared_ptr<const ManifoldSpec> nonparallel_r4() {
    return make_manifold("nonparallel_r4", 4, 1,
                         {{"0", "-(1 + 0.1*x1)", "0", "0"},
                          {"1 + 0.1*x1", "0", "0", "0"},
                          {"0", "0", "0", "-1"},
                          {"0", "0", "1", "0"}});
}

inline ExpectedCheck pass(std::string id, std::string detail = {}) { return {std::move(id), Status::pass, std::move(detail)}; }
inline ExpectedCheck fail(std::string id, std::string detail = {}) { return {std::move(id), Status::fail, std::move(detail)}; }
inline ExpectedCheck inapplicable_because(std::string id, std::string detail) {
    return {std::move(id), Status::inapplicable, std::move(detail)};
}

inline std::vector<FixtureEntry> build_catalog() {
    std::vector<FixtureEntry> out;
    const auto K = kaehler_r4();
    const auto C = cosymplectic_r5();
    const auto NP = nonparallel_r4();

    {
        FixtureEntry e{"kaehler_r4", "R^4 with g = I and the standard complex structure (mu = +1)", K, std::nullopt, {}};
        e.expected.family = Family::almost_hermitian_like;
        e.expected.checks = {pass("eq_1_1_compatibility"), pass("def_1_1_nondegeneracy"),
                             pass("prop_1_3_fundamental_form", "equivalence consistent"), pass("eq_4_1_parallel"),
                             pass("ex_1_2_family", "family=almost-Hermitian-like")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"product_r3", "R^3 with g = I and F = diag(1, 1, -1) (mu = -1)", product_r3(), std::nullopt, {}};
        e.expected.family = Family::almost_product_like;
        e.expected.checks = {pass("eq_1_1_compatibility"), pass("def_1_1_nondegeneracy"),
                             inapplicable_because("prop_1_3_fundamental_form", "mu = +1 failed"),
                             pass("eq_4_1_parallel"), pass("ex_1_2_family", "family=almost-product-like")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"cosymplectic_r5", "R^5 with g = I and F = J + 0, degenerate with a one-dimensional kernel", C,
                       std::nullopt, {}};
        e.expected.nondegenerate = false;
        e.expected.kernel_dim = 1;
        e.expected.family = Family::contact_like_degenerate;
        e.expected.checks = {pass("eq_1_1_compatibility"), fail("def_1_1_nondegeneracy", "kernel dimension 1"),
                             pass("prop_1_3_fundamental_form", "min rank 4 of 5"), pass("eq_4_1_parallel"),
                             pass("ex_1_2_family", "family=contact-like-degenerate")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"nonparallel_r4", "kaehler_r4 with the first complex line rescaled by 1 + 0.1 x1; not parallel",
                       NP, make_submanifold("nonparallel_slice", NP, 3, {"u1", "u2", "u3", "0"}, box(3, -1.0, 1.0)), {}};
        e.expected.parallel = false;
        e.expected.label = "normal-proper";
        e.expected.p = 2;
        e.expected.q = 1;
        e.expected.dtilde = 0;
        e.expected.checks = {pass("eq_1_1_compatibility"),
                             fail("eq_4_1_parallel", "not parallel"),
                             pass("def_2_1_classification", "label=normal-proper"),
                             pass("thm_3_1", "verdict=all-hold"),
                             pass("thm_3_3", "verdict=all-hold"),
                             inapplicable_because("prop_4_2", "parallelism failed"),
                             inapplicable_because("thm_4_4_dperp_integrable", "parallelism failed"),
                             inapplicable_because("thm_4_6", "parallelism failed"),
                             inapplicable_because("thm_4_8", "parallelism failed"),
                             inapplicable_because("thm_4_10", "parallelism failed")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"flat_cr_r3_in_c2", "the real hyperplane x4 = 0 in kaehler_r4", K,
                       make_submanifold("flat_cr", K, 3, {"u1", "u2", "u3", "0"}, box(3, -1.0, 1.0)), {}};
        e.expected.family = Family::almost_hermitian_like;
        e.expected.label = "normal-proper";
        e.expected.p = 2;
        e.expected.q = 1;
        e.expected.dtilde = 0;
        e.expected.checks = {pass("totally_geodesic"),
                             pass("def_2_1_classification", "label=normal-proper"),
                             pass("cor_2_6_eq_2_8"),
                             pass("cor_2_6_lagrangian"),
                             pass("thm_3_1", "verdict=all-hold"),
                             pass("thm_3_3", "verdict=all-hold"),
                             pass("prop_4_2"),
                             pass("thm_4_4_dperp_integrable"),
                             pass("thm_4_6", "verdict=all-hold"),
                             pass("thm_4_8", "verdict=all-hold"),
                             pass("thm_4_10", "verdict=all-hold")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"totally_real_plane", "the plane x2 = x4 = 0 in kaehler_r4", K,
                       make_submanifold("totally_real_plane", K, 2, {"u1", "0", "u2", "0"}, box(2, -1.0, 1.0)), {}};
        e.expected.family = Family::almost_hermitian_like;
        e.expected.label = "normal-anti-invariant";
        e.expected.p = 0;
        e.expected.q = 2;
        e.expected.dtilde = 0;
        e.expected.checks = {pass("totally_geodesic"),
                             pass("def_2_1_classification", "label=normal-anti-invariant"),
                             pass("cor_2_6_eq_2_8"),
                             pass("cor_2_6_lagrangian"),
                             pass("thm_3_1", "verdict=all-hold"),
                             pass("thm_3_3", "verdict=all-hold"),
                             pass("prop_4_2"),
                             pass("thm_4_4_dperp_integrable"),
                             pass("thm_4_6", "verdict=all-hold"),
                             pass("thm_4_8", "verdict=all-hold"),
                             pass("thm_4_10", "verdict=all-hold")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"complex_curve", "the holomorphic graph w = z^2 in kaehler_r4", K,
                       make_submanifold("complex_curve", K, 2, {"u1", "u2", "u1^2 - u2^2", "2*u1*u2"}, box(2, -1.0, 1.0)),
                       {}};
        e.expected.family = Family::almost_hermitian_like;
        e.expected.label = "invariant";
        e.expected.p = 2;
        e.expected.q = 0;
        e.expected.dtilde = 2;
        e.expected.checks = {fail("totally_geodesic", "not totally geodesic"),
                             pass("def_2_1_classification", "label=invariant"),
                             pass("thm_3_1", "verdict=all-hold"),
                             pass("thm_3_3", "verdict=all-hold"),
                             pass("thm_4_4_dperp_integrable"),
                             pass("thm_4_6", "verdict=all-hold"),
                             pass("eq_4_10_two_path"),
                             pass("thm_4_8", "verdict=all-hold"),
                             pass("thm_4_10", "verdict=all-hold")};
        out.push_back(std::move(e));
    }
    {
        const double pi = 3.14159265358979323846;
        FixtureEntry e{"s3_in_c2", "the unit 3-sphere in kaehler_r4 in spherical coordinates, away from the chart poles",
                       K,
                       make_submanifold("s3", K, 3,
                                        {"cos(u1)", "sin(u1)*cos(u2)", "sin(u1)*sin(u2)*cos(u3)",
                                         "sin(u1)*sin(u2)*sin(u3)"},
                                        Domain{{0.3, pi - 0.3}, {0.3, pi - 0.3}, {0.3, 2 * pi - 0.3}}),
                       {}};
        e.expected.family = Family::almost_hermitian_like;
        e.expected.label = "normal-proper";
        e.expected.p = 2;
        e.expected.q = 1;
        e.expected.dtilde = 0;
        e.expected.checks = {fail("totally_geodesic", "not totally geodesic"),
                             pass("def_2_1_classification", "label=normal-proper"),
                             pass("thm_3_1", "verdict=none-hold"),
                             fail("thm_3_1_c1_D_integrable"),
                             fail("thm_3_1_c2_Q_Nphi"),
                             pass("thm_3_3", "verdict=all-hold"),
                             pass("prop_4_2"),
                             pass("thm_4_4_dperp_integrable"),
                             pass("thm_4_6", "verdict=none-hold"),
                             pass("eq_4_10_two_path"),
                             pass("thm_4_8", "verdict=all-hold"),
                             pass("eq_4_14_chain"),
                             pass("thm_4_10", "verdict=none-hold")};
        out.push_back(std::move(e));
    }
    {
        FixtureEntry e{"contact_slice_r5", "the slice x4 = x5 = 0 in cosymplectic_r5", C,
                       make_submanifold("contact_slice", C, 3, {"u1", "u2", "u3", "0", "0"}, box(3, -1.0, 1.0)), {}};
        e.expected.nondegenerate = false;
        e.expected.kernel_dim = 1;
        e.expected.family = Family::contact_like_degenerate;
        e.expected.label = "proper";
        e.expected.p = 2;
        e.expected.q = 1;
        e.expected.dtilde = 1;
        e.expected.checks = {pass("def_2_1_classification", "label=proper"),
                             pass("prop_2_5_iv_phi_structure"),
                             pass("prop_2_5_v_F2Dperp_in_Dperp"),
                             pass("prop_2_5_vi_Dtilde_invariant"),
                             inapplicable_because("cor_2_6_eq_2_8", "ambient nondegeneracy failed"),
                             inapplicable_because("cor_2_6_lagrangian", "ambient nondegeneracy failed"),
                             inapplicable_because("thm_3_1", "ambient nondegeneracy"),
                             inapplicable_because("thm_3_3", "ambient nondegeneracy failed"),
                             pass("eq_3_8_two_path"),
                             inapplicable_because("prop_4_2", "ambient nondegeneracy failed"),
                             inapplicable_because("thm_4_4_dperp_integrable", "ambient nondegeneracy failed")};
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace detail

inline const std::vector<FixtureEntry>& catalog() {
    static const std::vector<FixtureEntry> entries = detail::build_catalog();
    return entries;
}

struct FixtureListing {
    std::string name;
    std::string description;
};

inline std::vector<FixtureListing> list_fixtures() {
    std::vector<FixtureListing> out;
    for (const auto& e : catalog()) out.push_back({e.name, e.description});
    return out;
}

inline const FixtureEntry& get_fixture(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return e;
    throw UnknownFixture(name);
}

}  // namespace affinor
