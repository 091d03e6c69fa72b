#include "support.hpp"

#include "scdt/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

using namespace scdt;
using namespace scdt::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("scdt_pipeline_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Copy of the case-study fixture directory with an editable manifest.
fs::path case_copy(const std::string& name) {
    const auto dir = scratch(name);
    for (const auto& f : fs::directory_iterator(source_path("fixtures/case_study"))) fs::copy(f.path(), dir / f.path().filename());
    std::ofstream(dir / "manifest.yaml") << "topology: topology.yaml\nscenario: scenario.yaml\ncatalog: catalog.tsv\n"
                                            "governance: governance.yaml\nout: out\n";
    return dir;
}

struct Cli {
    int status = -1;
    std::string out;
    std::string err;
};

Cli cli(const std::string& args) {
    const auto dir = scratch("cli_capture");
    const auto o = dir / "stdout", e = dir / "stderr";
    const auto cmd = std::string(SCDT_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(o.string()), slurp(e.string())};
}

std::map<std::string, std::string> files_of(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& f : fs::directory_iterator(dir)) out[f.path().filename().string()] = slurp(f.path().string());
    return out;
}

const fs::path& case_run() {
    static const fs::path dir = [] {
        auto m = load_manifest(fixture("manifest.yaml"));
        m.out = scratch("case_run");
        cmd_run(m);
        return m.out;
    }();
    return dir;
}

} // namespace

TEST_CASE("manifest paths resolve against the manifest") {
    const auto m = load_manifest(fixture("manifest.yaml"));
    CHECK(fs::equivalent(m.topology, fixture("topology.yaml")));
    CHECK(fs::equivalent(m.catalog, fixture("catalog.tsv")));
    CHECK_FALSE(m.seed);
    CHECK_THROWS_WITH_AS(load_manifest("/nonexistent/manifest.yaml"), doctest::Contains("cli_runner.IoError"), Error);
    const auto dir = scratch("bad_manifest");
    std::ofstream(dir / "m.yaml") << "topology: [\n";
    CHECK_THROWS_WITH_AS(load_manifest((dir / "m.yaml").string()), doctest::Contains("cli_runner.ParseError"), Error);
}

TEST_CASE("validate") {
    std::ostringstream text;
    CHECK(cmd_validate(load_manifest(fixture("manifest.yaml")), text) == 0);
    const auto ok = cli("validate --manifest " + fixture("manifest.yaml"));
    CHECK(ok.status == 0);

    const auto dir = case_copy("no_carrier");
    std::ofstream(dir / "topology.yaml", std::ios::app) << "  - {from: supplier2/main, to: retailer1/main}\n";
    const auto bad = cli("validate --manifest " + (dir / "manifest.yaml").string());
    CHECK(bad.status == 1);
    CHECK(bad.err.find("TRANSPORT_REQUIRED") != std::string::npos);
    const auto run = cli("run --manifest " + (dir / "manifest.yaml").string());
    CHECK(run.status == 1);
    CHECK(run.err.find("topology.Invalid") != std::string::npos);

    const auto missing = cli("validate --manifest /nonexistent/manifest.yaml");
    CHECK(missing.status == 2);
    fs::remove(dir / "scenario.yaml");
    CHECK(cli("validate --manifest " + (dir / "manifest.yaml").string()).status == 2);
}

TEST_CASE("argument errors exit with 2") {
    CHECK(cli("").status == 2);
    CHECK(cli("frobnicate").status == 2);
    CHECK(cli("run").status == 2);
    CHECK(cli("whatif --manifest " + fixture("manifest.yaml")).status == 2);
    CHECK(cli("run --manifest " + fixture("manifest.yaml") + " --seed banana").status == 2);
}

TEST_CASE("pattern not admitted by the declared feature") {
    const auto dir = case_copy("warehouse");
    auto gov = slurp((dir / "governance.yaml").string());
    const auto at = gov.find("pattern: PublishSubscribe");
    REQUIRE(at != std::string::npos);
    gov.replace(at, std::string("pattern: PublishSubscribe").size(), "pattern: DataWarehouse\n  period: 10");
    std::ofstream(dir / "governance.yaml") << gov;
    const auto r = cli("run --manifest " + (dir / "manifest.yaml").string());
    CHECK(r.status == 1);
    CHECK(r.err.find("sos_governance.PatternFeatureMismatch") != std::string::npos);
}

TEST_CASE("run writes every export and is byte-identical on rerun") {
    const auto& first = case_run();
    auto m = load_manifest(fixture("manifest.yaml"));
    m.out = scratch("case_rerun");
    const auto s = cmd_run(m);
    CHECK(s.files.size() == 10);
    const auto a = files_of(first), b = files_of(m.out);
    CHECK(a.size() == 10);
    CHECK(a == b);
    CHECK(EventLog::from_tsv(a.at("events.tsv")).hash() == s.events_hash);
    CHECK(a.at("structure.txt") == slurp(source_path("tests/golden_structure.txt")));

    const auto via_cli = scratch("case_cli");
    const auto r = cli("run --manifest " + fixture("manifest.yaml") + " --out " + via_cli.string());
    CHECK(r.status == 0);
    CHECK(files_of(via_cli) == a);
}

TEST_CASE("seed override changes the run") {
    auto m = load_manifest(fixture("manifest.yaml"));
    m.out = scratch("seeded");
    m.seed = 7;
    const auto s = cmd_run(m);
    CHECK(s.events_hash != EventLog::from_tsv(slurp((case_run() / "events.tsv").string())).hash());
    const auto in = load_inputs(m);
    CHECK(in.scenario.seed == 7);
    CHECK(in.governance.network.seed == 7);
}

TEST_CASE("report sections") {
    const auto& dir = case_run();
    auto m = load_manifest(fixture("manifest.yaml"));
    m.out = dir;
    const auto report = cmd_report(m);
    CHECK(report == slurp((dir / "report.txt").string()));
    std::istringstream lines(report);
    std::string line;
    int members = 0, modules = 0;
    std::vector<std::string> metric_lines;
    std::string current;
    while (std::getline(lines, line)) {
        if (line.rfind("[member ", 0) == 0) {
            ++members;
            current = line.substr(8, line.find(']') - 8);
        }
        if (line.rfind("  module ", 0) == 0 && !current.empty()) ++modules;
        if (line.rfind("  metric\t", 0) == 0) metric_lines.push_back(current + line.substr(8));
    }
    CHECK(members == 6);
    CHECK(modules == 8);

    std::vector<std::string> exported;
    std::istringstream metrics(slurp((dir / "metrics.tsv").string()));
    while (std::getline(metrics, line)) exported.push_back(line);
    CHECK(metric_lines == exported);
    for (const char* section : {"== system rollups ==", "== integration quality ==", "== system of systems =="}) {
        CHECK(report.find(section) != std::string::npos);
    }

    const auto quality = slurp((dir / "quality.txt").string());
    CHECK(quality.find("consistency=1/1") != std::string::npos);
    const auto sos = slurp((dir / "sos.txt").string());
    CHECK(sos.find("Data-Centric System") != std::string::npos);

    m.out = scratch("empty_out");
    CHECK_THROWS_WITH_AS(cmd_report(m), doctest::Contains("cli_runner.IoError"), Error);
    CHECK(cli("report --manifest " + fixture("manifest.yaml") + " --out " + m.out.string()).status == 2);
}

TEST_CASE("metrics export equals the single-pass oracle") {
    const auto& dir = case_run();
    const auto c = case_study();
    const auto log = EventLog::from_tsv(slurp((dir / "events.tsv").string()));
    CHECK(log == run_scenario(c.system, c.scenario));
    std::string expect;
    for (const auto& member : c.system.members) {
        for (const auto& code : SubDigitalTwin(member, case_catalog(), c.scenario).applicable_metrics()) {
            const auto* def = case_catalog()->find_metric(code);
            expect += metric_to_tsv(member.id, metric_oracle(log, member.id, *def, 0, 1000, c.scenario.quoted_lead_time)) + "\n";
        }
    }
    CHECK(slurp((dir / "metrics.tsv").string()) == expect);
}

TEST_CASE("what-if") {
    const auto& dir = case_run();
    auto m = load_manifest(fixture("manifest.yaml"));
    m.out = dir;
    const auto identity = cmd_whatif(m, "manufactory", {});
    REQUIRE_FALSE(identity.empty());
    for (const auto& row : identity) {
        CHECK(row.baseline == row.predicted);
        if (row.baseline) CHECK(*row.delta() == Rational(0));
        else CHECK_FALSE(row.delta());
    }

    const Perturbation doubled{Rational(2), Rational(1), Rational(1)};
    const auto rows = cmd_whatif(m, "retailer1", doubled);
    // pass-through: the table is subdt.what_if verbatim
    const auto c = case_study();
    const auto log = EventLog::from_tsv(slurp((dir / "events.tsv").string()));
    SubDigitalTwin twin(*c.system.find_member("retailer1"), case_catalog(), c.scenario);
    twin.ingest(member_slice(log, "retailer1"));
    twin.flush();
    const auto predicted = twin.what_if(doubled, c.scenario.horizon).metrics;
    const auto baseline = twin.what_if({}, c.scenario.horizon).metrics;
    REQUIRE(rows.size() == predicted.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].code == predicted[i].code);
        CHECK(rows[i].predicted == predicted[i].value);
        CHECK(rows[i].baseline == baseline[i].value);
    }

    CHECK_THROWS_WITH_AS(cmd_whatif(m, "nobody", {}), doctest::Contains("topology.UnknownReference"), Error);
    const auto table = render_whatif("retailer1", rows);
    CHECK(table.find("retailer1") != std::string::npos);

    const auto ok = cli("whatif --manifest " + fixture("manifest.yaml") + " --out " + dir.string() +
                        " --member retailer1 --perturb demand=2");
    CHECK(ok.status == 0);
    CHECK(ok.out == table);
    CHECK(cli("whatif --manifest " + fixture("manifest.yaml") + " --out " + dir.string() + " --member nobody").status == 1);
    CHECK(cli("whatif --manifest " + fixture("manifest.yaml") + " --out " + dir.string() +
              " --member retailer1 --perturb speed=2").status == 2);
    CHECK(cli("whatif --manifest " + fixture("manifest.yaml") + " --out " + scratch("no_run").string() +
              " --member retailer1").status == 2);
}

TEST_CASE("perturbation parsing") {
    const auto p = parse_perturbation({"demand=2", "capacity=1/2", "lead=3"});
    CHECK(p.demand == Rational(2));
    CHECK(p.capacity == Rational(1, 2));
    CHECK(p.lead_time == Rational(3));
    CHECK(parse_perturbation({}).identity());
    CHECK(parse_perturbation({"lead_time=1.5"}).lead_time == Rational(3, 2));
    for (const char* bad : {"demand", "speed=2", "demand=abc", "demand=-1"}) {
        CAPTURE(bad);
        CHECK_THROWS_WITH_AS(parse_perturbation({bad}), doctest::Contains("cli_runner.BadPerturbation"), Error);
    }
}
