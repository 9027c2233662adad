#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace affinor;
using testing_support::vec;

namespace {

const double kPi = 3.14159265358979323846;

VectorField field(const std::vector<std::string>& comps, int arity) {
    std::vector<Expression> e;
    for (const auto& c : comps) e.push_back(parse(c, static_cast<std::size_t>(arity)));
    return VectorField::from_expressions(std::move(e));
}

std::vector<ManifoldSpec> curved_and_fixture_manifolds() {
    std::vector<ManifoldSpec> out{testing_support::sphere_chart()};
    ManifoldSpec warped = testing_support::euclidean(3, 1, {"0", "0", "0", "0", "0", "0", "0", "0", "0"});
    warped.metric = {parse("1 + x2^2", 3), parse("0.3*x3", 3), parse("0", 3),
                     parse("0.3*x3", 3), parse("2 + sin(x1)", 3), parse("0.1*x1*x2", 3),
                     parse("0", 3), parse("0.1*x1*x2", 3), parse("exp(0.2*x3)", 3)};
    out.push_back(warped);
    for (const auto& f : list_fixtures()) out.push_back(*get_fixture(f.name).manifold);
    return out;
}

}  // namespace

TEST_CASE("metric_at evaluates and rejects degenerate metrics") {
    const ManifoldSpec E = testing_support::euclidean(4, 1, std::vector<std::string>(16, "0"));
    CHECK(metric_at(E, vec({0.1, 0.2, 0.3, 0.4})).isApprox(Mat::Identity(4, 4)));
    const ManifoldSpec S = testing_support::sphere_chart();
    CHECK((metric_at(S, vec({kPi / 2, 0.0})) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(metric_at(S, vec({0.0, 0.0})), StructuralError);
}

TEST_CASE("Christoffel symbols") {
    const ManifoldSpec E = testing_support::euclidean(3, 1, std::vector<std::string>(9, "0"));
    CHECK(christoffel(E, vec({0.5, -0.2, 0.1})).max_abs() == 0.0);
    const ManifoldSpec S = testing_support::sphere_chart();
    const double t = 0.7;
    Tensor3 g = christoffel(S, vec({t, 0.0}));
    CHECK(g(0, 1, 1) == Catch::Approx(-std::sin(t) * std::cos(t)));
    CHECK(g(1, 0, 1) == Catch::Approx(std::cos(t) / std::sin(t)));
    CHECK(g(1, 1, 0) == Catch::Approx(std::cos(t) / std::sin(t)));
    CHECK(g(0, 0, 0) == 0.0);
}

TEST_CASE("covariant derivative examples") {
    const ManifoldSpec E = testing_support::euclidean(3, 1, std::vector<std::string>(9, "0"));
    const Vec x = vec({0.4, -0.3, 0.2});
    Vec d = covariant_derivative(E, field({"1", "0", "0"}, 3), field({"x1^2", "0", "0"}, 3), x);
    CHECK(d[0] == Catch::Approx(0.8));
    CHECK(d.tail(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(covariant_derivative(E, field({"x2", "x1", "1"}, 3), field({"1", "2", "3"}, 3), x).cwiseAbs().maxCoeff() == 0.0);

    const ManifoldSpec S = testing_support::sphere_chart();
    Vec s = covariant_derivative(S, field({"0", "1"}, 2), field({"0", "1"}, 2), vec({kPi / 4, 0.0}));
    CHECK(s[0] == Catch::Approx(-0.5));
    CHECK(s[1] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("Lie bracket examples") {
    CHECK(lie_bracket(field({"1", "0"}, 2), field({"0", "1"}, 2), vec({0.3, 0.1})).cwiseAbs().maxCoeff() == 0.0);
    Vec b = lie_bracket(field({"x2", "0"}, 2), field({"0", "1"}, 2), vec({0.3, 0.1}));
    CHECK(b[0] == Catch::Approx(-1.0));
    CHECK(b[1] == 0.0);

    // Procedural fields go through differences; compare to the exact path.
    VectorField X = field({"sin(x1*x2)", "x1^2"}, 2);
    VectorField Y = field({"cos(x2)", "x1*x2"}, 2);
    VectorField Xp = VectorField::procedural(2, 2, [X](const Vec& p) { return X(p); });
    VectorField Yp = VectorField::procedural(2, 2, [Y](const Vec& p) { return Y(p); });
    const Vec x = vec({0.4, -0.6});
    CHECK((lie_bracket(X, Y, x) - lie_bracket(Xp, Yp, x)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((lie_bracket(X, Y, x) + lie_bracket(Y, X, x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Levi-Civita: torsion free and metric compatible") {
    const std::vector<std::string> comps_a = {"sin(x1) + x2", "x1*x2", "cos(x1)", "x2^2", "1"};
    const std::vector<std::string> comps_b = {"x2", "exp(0.3*x1)", "x1^2", "1", "sin(x2)"};
    for (const ManifoldSpec& M : curved_and_fixture_manifolds()) {
        const int m = M.dim;
        const auto arity = static_cast<std::size_t>(m);
        std::vector<Expression> ea, eb;
        for (int i = 0; i < m; ++i) {
            ea.push_back(parse(comps_a[static_cast<std::size_t>(i)], arity));
            eb.push_back(parse(comps_b[static_cast<std::size_t>(i)], arity));
        }
        // Component strings may mention x2; every manifold here has m >= 2.
        VectorField X = VectorField::from_expressions(ea), Y = VectorField::from_expressions(eb);
        double torsion = 0.0, compat = 0.0;
        for (const Vec& x : sample_points(M.domain, 20, 5)) {
            torsion = std::max(torsion, (covariant_derivative(M, X, Y, x) - covariant_derivative(M, Y, X, x) -
                                         lie_bracket(X, Y, x))
                                            .cwiseAbs()
                                            .maxCoeff());
            const Tensor3 G = christoffel(M, x);
            const Mat g = metric_at(M, x);
            for (int k = 0; k < m; ++k) {
                const Mat dg = testing_support::fd_jacobian(
                                   [&](const Vec& p) {
                                       Mat gp = metric_at(M, p);
                                       return Vec(Eigen::Map<const Vec>(gp.data(), m * m));
                                   },
                                   x)
                                   .col(k)
                                   .reshaped(m, m);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) {
                        double r = dg(i, j);
                        for (int l = 0; l < m; ++l) r -= G(l, k, i) * g(l, j) + G(l, k, j) * g(i, l);
                        compat = std::max(compat, std::abs(r));
                    }
            }
        }
        INFO(M.name);
        CHECK(torsion <= 1e-8);
        CHECK(compat <= 1e-7);
    }
}

TEST_CASE("Nijenhuis tensor") {
    const ManifoldSpec& K = testing_support::fixture_manifold("kaehler_r4");
    VectorField X = field({"x1*x2", "sin(x3)", "x4^2", "cos(x1*x4)"}, 4);
    VectorField Y = field({"exp(0.5*x2)", "x1 - x3", "x2*x4", "sin(x1)"}, 4);
    double worst = 0.0;
    for (const Vec& x : sample_points(K.domain, 20, 3)) {
        worst = std::max(worst, nijenhuis_of(K.affinor, 4, X, Y, x).cwiseAbs().maxCoeff());
        CHECK(nijenhuis_of(K.affinor, 4, X, X, x).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(worst <= 1e-7);

    // Constant fields under a constant-coefficient affinor: every bracket vanishes.
    const ManifoldSpec A = testing_support::euclidean(2, 1, {"1", "2", "3", "4"});
    CHECK(nijenhuis_of(A.affinor, 2, field({"1", "2"}, 2), field({"-1", "0.5"}, 2), vec({0.2, 0.1})).norm() == 0.0);

    // Non-constant affinor: bracket route and coordinate formula agree.
    const ManifoldSpec W = testing_support::euclidean(3, 1, {"x2", "x1*x3", "0", "sin(x3)", "1", "x1^2", "0", "x2*x3", "cos(x1)"});
    VectorField U = field({"x2", "1", "x1*x3"}, 3);
    VectorField V = field({"x3^2", "x1", "sin(x2)"}, 3);
    for (const Vec& x : sample_points(W.domain, 10, 9)) {
        const Vec bracket_route = nijenhuis_of(W.affinor, 3, U, V, x);
        const Vec tensor_route = nijenhuis_tensor(W, x, U(x), V(x));
        CHECK((bracket_route - tensor_route).cwiseAbs().maxCoeff() < 1e-7);
        CHECK(nijenhuis_tensor(W, x, U(x), U(x)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("nabla F") {
    const Vec x = vec({0.2, -0.1, 0.3, 0.5});
    CHECK(nabla_affinor(testing_support::fixture_manifold("kaehler_r4"), x).max_abs() == 0.0);
    CHECK(nabla_affinor(testing_support::fixture_manifold("cosymplectic_r5"), vec({0.2, -0.1, 0.3, 0.5, 0.0})).max_abs() == 0.0);
    const Tensor3 n = nabla_affinor(testing_support::fixture_manifold("nonparallel_r4"), x);
    CHECK(n(0, 1, 0) == Catch::Approx(-0.1));
    CHECK(n(1, 0, 0) == Catch::Approx(0.1));
    CHECK(n(0, 1, 1) == 0.0);

    // Curved metric with a parallel-by-construction affinor F = identity.
    ManifoldSpec S = testing_support::sphere_chart();
    S.affinor = {parse("1", 2), parse("0", 2), parse("0", 2), parse("1", 2)};
    CHECK(nabla_affinor(S, vec({0.8, 0.1})).max_abs() < 1e-14);
}

TEST_CASE("manifold validation") {
    ManifoldSpec M = testing_support::euclidean(2, 1, {"0", "-1", "1", "0"});
    CHECK_NOTHROW(validate_manifold(M));
    M.mu = 2;
    CHECK_THROWS_WITH(validate_manifold(M), "mu must be -1 or +1");
    M.mu = 1;
    M.metric[1] = parse("0.1", 2);
    CHECK_THROWS_WITH(validate_manifold(M), Catch::Matchers::ContainsSubstring("metric is not symmetric"));
    M.metric[1] = parse("0", 2);
    M.metric[3] = parse("-1", 2);
    CHECK_THROWS_WITH(validate_manifold(M), Catch::Matchers::ContainsSubstring("not positive definite"));
}
