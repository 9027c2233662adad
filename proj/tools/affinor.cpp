// affinor: verify (g, F, mu)-structures and their semi-invariant submanifolds.
//
//   affinor list
//   affinor export <fixture> <path>
//   affinor verify <spec> [--sub <spec>] [--points N] [--seed S] [--tol T]
//                  [--checks id,id,...] [--format text|json] [-o path]
//   affinor verify --fixture <name> [...]
//
// Exit codes: 0 ok, 1 a check failed, 2 input error, 3 unresolved
// (indeterminate or rank-ambiguous) with no failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affinor/affinor.hpp"

namespace {

struct VerifyArgs {
    std::string spec;
    std::string sub;
    std::string fixture;
    std::string format = "text";
    std::string output;
    affinor::SuiteOptions options;
};

int run_list() {
    for (const auto& f : affinor::list_fixtures()) std::cout << f.name << "  " << f.description << "\n";
    return affinor::kExitOk;
}

int run_export(const std::string& name, const std::string& path) {
    const auto& f = affinor::get_fixture(name);
    affinor::save_spec(path, *f.manifold, f.submanifold ? &*f.submanifold : nullptr);
    return affinor::kExitOk;
}

int run_verify(const VerifyArgs& a) {
    std::shared_ptr<const affinor::ManifoldSpec> M;
    std::optional<affinor::SubmanifoldSpec> S;
    affinor::ReportHeader header;
    if (!a.fixture.empty()) {
        if (!a.spec.empty()) throw affinor::SpecError(0, "give either a spec file or --fixture, not both");
        const auto& f = affinor::get_fixture(a.fixture);
        M = f.manifold;
        S = f.submanifold;
        header.fixture = f.name;
    } else {
        if (a.spec.empty()) throw affinor::SpecError(0, "verify needs a spec file or --fixture");
        auto doc = affinor::load_spec(a.spec);
        if (!doc.manifold) throw affinor::SpecError(0, a.spec + ": no [manifold] section");
        M = doc.manifold;
        S = doc.submanifold;
    }
    if (!a.sub.empty()) {
        auto doc = affinor::load_spec(a.sub, M);
        if (!doc.submanifold) throw affinor::SpecError(0, a.sub + ": no [submanifold] section");
        S = doc.submanifold;
    }
    header.options = a.options;

    const auto reports = affinor::run_suite(*M, S ? &*S : nullptr, a.options);
    const auto format = a.format == "json" ? affinor::ReportFormat::json : affinor::ReportFormat::text;
    if (a.output.empty()) {
        affinor::emit_report(reports, format, std::cout, header);
    } else {
        std::ofstream out(a.output, std::ios::binary);
        if (!out) throw affinor::SpecError(0, "cannot write '" + a.output + "'");
        affinor::emit_report(reports, format, out, header);
    }
    return affinor::exit_code(reports);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks for (g, F, mu)-manifolds and semi-invariant submanifolds"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List built-in fixtures");

    std::string export_name, export_path;
    auto* exp = app.add_subcommand("export", "Write a fixture as a spec file");
    exp->add_option("fixture", export_name, "Fixture name")->required();
    exp->add_option("path", export_path, "Output path")->required();

    VerifyArgs va;
    std::string checks;
    auto* verify = app.add_subcommand("verify", "Run the check suite on a spec");
    verify->add_option("spec", va.spec, "Spec file with a [manifold] section (and optionally [submanifold])");
    verify->add_option("--fixture", va.fixture, "Use a built-in fixture instead of a spec file");
    verify->add_option("--sub", va.sub, "Spec file with a [submanifold] section for the ambient above");
    verify->add_option("--points", va.options.points, "Sample points per check")->check(CLI::PositiveNumber);
    verify->add_option("--seed", va.options.seed, "Sampling seed");
    verify->add_option("--tol", va.options.tol, "Multiplier applied to every pass threshold")->check(CLI::PositiveNumber);
    verify->add_option("--checks", checks, "Comma-separated check id prefixes");
    verify->add_option("--format", va.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    verify->add_option("-o,--output", va.output, "Write the report here instead of standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : affinor::kExitInputError;
    }

    if (!checks.empty()) {
        std::string item;
        for (char c : checks + ",") {
            if (c == ',') {
                if (!item.empty()) va.options.checks.push_back(item);
                item.clear();
            } else if (c != ' ') {
                item += c;
            }
        }
    }

    try {
        if (*list) return run_list();
        if (*exp) return run_export(export_name, export_path);
        return run_verify(va);
    } catch (const affinor::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const affinor::UnknownFixture& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const affinor::StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const affinor::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return affinor::kExitInputError;
}
