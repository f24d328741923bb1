#include <iostream>

#include <CLI11.hpp>

#include "cocycle/commands.hpp"

using namespace cocycle;

int main(int argc, char** argv) {
    CLI::App app{"SL(2,R) cocycles over irrational rotations"};
    app.require_subcommand(1);

    std::string config;
    Overrides ov;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config, "JSON config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", ov.output, "output directory");
        sub->add_option("--precision", ov.precision_bits, "MPFR bits for omega")->check(CLI::Range(53, 4096));
        sub->add_option("--max-level", ov.max_level, "deepest refinement level");
    };
    auto* cf = app.add_subcommand("cf", "continued fraction, Brjuno sum, recurrence check");
    auto* cs = app.add_subcommand("critical-set", "critical set approximations and exclusion ledger");
    auto* scan = app.add_subcommand("scan", "Lyapunov / hyperbolicity scan over epsilon");
    auto* sch = app.add_subcommand("schrodinger", "phase family from a torus potential");
    for (auto* s : {cf, cs, scan, sch}) common(s);
    scan->add_option("--mode", ov.mode, "theorem3 | theorem4")->check(CLI::IsMember({"theorem3", "theorem4"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    return guarded(std::cerr, [&] {
        const RunConfig cfg = load_config(config, ov);
        if (cf->parsed()) return cmd_cf(cfg, std::cerr);
        if (cs->parsed()) return cmd_critical_set(cfg, std::cerr);
        if (scan->parsed()) return cmd_scan(cfg, std::cerr);
        return cmd_schrodinger(cfg, std::cerr);
    });
}
