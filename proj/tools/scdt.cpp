// scdt: command-line runner for the supply chain digital twin pipeline.
//
//   scdt validate --manifest PATH
//   scdt run      --manifest PATH [--seed N] [--out DIR]
//   scdt whatif   --manifest PATH --member ID [--perturb KEY=FACTOR ...] [--out DIR]
//   scdt report   --manifest PATH [--out DIR]
//
// Exit status: 0 success, 1 domain error, 2 I/O or parse error.

#include "scdt/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

struct Options {
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string member;
    std::vector<std::string> perturb;
};

scdt::RunManifest manifest_of(const Options& o) {
    auto m = scdt::load_manifest(o.manifest);
    if (o.seed) m.seed = o.seed;
    if (!o.out.empty()) m.out = o.out;
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Supply chain digital twin runner"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifest", o.manifest, "run manifest (YAML)")->required();
        sub->add_option("--out", o.out, "output directory (overrides the manifest)");
    };
    auto* validate = app.add_subcommand("validate", "check topology, catalog, scenario and governance files");
    add_common(validate);
    auto* run = app.add_subcommand("run", "emulate, build twins, integrate and write every export");
    add_common(run);
    run->add_option("--seed", o.seed, "seed override");
    auto* whatif = app.add_subcommand("whatif", "predicted against baseline metrics for one member");
    add_common(whatif);
    whatif->add_option("--member", o.member, "member id")->required();
    whatif->add_option("--perturb", o.perturb, "KEY=FACTOR with KEY in demand, capacity, lead_time");
    auto* report = app.add_subcommand("report", "print the report of a completed run");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            std::ostringstream text;
            const int rc = scdt::cmd_validate(manifest_of(o), text);
            (rc == 0 ? std::cout : std::cerr) << text.str();
            return rc;
        }
        if (run->parsed()) {
            const auto s = scdt::cmd_run(manifest_of(o));
            std::cout << "events " << s.events << " hash " << scdt::hex64(s.events_hash) << "\n";
            for (const auto& f : s.files) std::cout << (s.out / f).string() << "\n";
            return 0;
        }
        if (whatif->parsed()) {
            const auto p = scdt::parse_perturbation(o.perturb);
            std::cout << scdt::render_whatif(o.member, scdt::cmd_whatif(manifest_of(o), o.member, p));
            return 0;
        }
        if (report->parsed()) {
            std::cout << scdt::cmd_report(manifest_of(o));
            return 0;
        }
    } catch (const scdt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return scdt::exit_status(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
