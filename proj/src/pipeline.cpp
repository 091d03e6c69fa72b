#include "scdt/pipeline.hpp"

#include "yaml_util.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace scdt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "cli_runner";

[[noreturn]] void io_error(const std::string& msg) { throw Error(ErrorKind::Io, "cli_runner.IoError", msg); }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) io_error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) io_error("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) { return yaml::read_text_file(path.string(), kModule); }

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::string opt_fraction(const std::optional<Rational>& v) { return v ? format_fraction(*v) : std::string("absent"); }

const Member& require_member(const SupplyChainSystem& system, const std::string& id) {
    const auto* m = system.find_member(id);
    if (!m) throw Error(ErrorKind::Domain, "topology.UnknownReference", "no member '" + id + "'");
    return *m;
}

std::vector<SubDigitalTwin> build_twins(const Inputs& in, const EventLog& log) {
    std::vector<SubDigitalTwin> twins;
    twins.reserve(in.system.members.size());
    for (const auto& m : in.system.members) twins.emplace_back(m, in.catalog, in.scenario);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < twins.size(); ++i) index[twins[i].member_id()] = i;
    for (const auto& e : log) twins[index.at(e.member)].ingest(e);
    for (auto& t : twins) t.flush();
    return twins;
}

// Pushes each twin's snapshot onto the bus once per sync period, then syncs.
void drive_bus(SCDTwin& scdt, const std::vector<SubDigitalTwin>& twins, const GovernanceConfig& g, Tick horizon) {
    Bus& bus = scdt.bus();
    const auto& exchanges = bus.config().exchanges;
    const bool inform = exchanges.count(ExchangeType::Inform) > 0;
    const bool sync = exchanges.count(ExchangeType::Sync) > 0;
    const std::string topic = bus.config().topics.empty() ? "events" : bus.config().topics.front();

    auto failures = g.failures;
    std::stable_sort(failures.begin(), failures.end(),
                     [](const InjectedFailure& a, const InjectedFailure& b) { return a.time < b.time; });
    std::size_t next_failure = 0;
    std::map<std::string, StateSummary> published;
    std::uint64_t id = 0;

    for (Tick t = g.sync_period;; t += g.sync_period) {
        const Tick now = std::min(t, horizon);
        while (next_failure < failures.size() && failures[next_failure].time < now) {
            bus.inject_endpoint_failure(failures[next_failure++].member);
        }
        for (const auto& twin : twins) {
            const auto& member = twin.member_id();
            auto snap = twin.snapshot(now);
            auto& last = published[member];
            std::ostringstream body;
            for (const auto& [k, v] : last) {
                if (!snap.count(k)) snap[k] = "0";
            }
            for (const auto& [k, v] : snap) {
                auto it = last.find(k);
                if (it != last.end() && it->second == v) continue;
                bus.update(member, member + "/" + k, v);
                body << member << "/" << k << "=" << v << "\n";
            }
            last = std::move(snap);
            if (inform) bus.publish(make_message(++id, member, topic, body.str(), now));
        }
        if (sync) bus.sync_round(now);
        if (now >= horizon) break;
    }
}

std::string divergence_tsv(const std::vector<SubDigitalTwin>& twins, const EventLog& log) {
    std::ostringstream out;
    for (const auto& t : twins) {
        EventFilter f;
        f.member = t.member_id();
        out << t.member_id() << '\t' << format_fraction(divergence(t, replay(log, f))) << '\t' << t.journal().size()
            << '\t' << t.quarantine().size() << '\t' << t.rejected() << '\t' << t.duplicates() << '\n';
    }
    return out.str();
}

} // namespace

RunManifest load_manifest(const std::string& path) {
    const auto root = yaml::parse_document(yaml::read_text_file(path, kModule), kModule);
    if (!root.IsMap()) yaml::parse_error(kModule, "manifest must be a mapping");
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const char* key) { return (base / yaml::required_string(root, key, kModule)).lexically_normal(); };
    RunManifest m;
    m.topology = resolve("topology");
    m.scenario = resolve("scenario");
    m.catalog = resolve("catalog");
    m.governance = resolve("governance");
    m.out = root["out"] ? resolve("out") : (base / "out").lexically_normal();
    if (auto seed = yaml::optional_int(root, "seed", kModule)) {
        if (*seed < 0) yaml::parse_error(kModule, "seed must be non-negative");
        m.seed = static_cast<std::uint64_t>(*seed);
    }
    return m;
}

Inputs load_inputs(const RunManifest& manifest) {
    Inputs in;
    in.system = load_topology_file(manifest.topology.string());
    in.catalog = std::make_shared<const Catalog>(Catalog::load_file(manifest.catalog.string()));
    in.scenario = load_scenario_file(manifest.scenario.string());
    in.governance = load_governance_file(manifest.governance.string());
    if (manifest.seed) {
        in.scenario.seed = *manifest.seed;
        in.governance.network.seed = *manifest.seed;
    }
    in.validation = validate_topology(in.system, in.catalog.get());
    return in;
}

int exit_status(const Error& error) noexcept { return error.kind() == ErrorKind::Domain ? 1 : 2; }

int cmd_validate(const RunManifest& manifest, std::ostream& out) {
    const auto in = load_inputs(manifest);
    out << in.validation.render();
    if (!in.validation.valid()) return 1;
    validate_scenario(in.scenario);
    out << "members " << in.system.members.size() << ", modules " << in.system.module_count() << ", catalog "
        << in.catalog->process_count() << " processes\n";
    return 0;
}

RunSummary cmd_run(const RunManifest& manifest) {
    const auto in = load_inputs(manifest);
    if (!in.validation.valid()) {
        throw Error(ErrorKind::Domain, "topology.Invalid", "topology failed validation\n" + in.validation.render());
    }
    const auto log = run_scenario(in.system, in.scenario);
    const auto twins = build_twins(in, log);
    const Tick horizon = in.scenario.horizon;

    std::vector<const SubDigitalTwin*> ptrs;
    for (const auto& t : twins) ptrs.push_back(&t);
    const auto& g = in.governance;
    SCDTwin scdt = integrate(ptrs, g.pattern, g.network, g.feature);
    drive_bus(scdt, twins, g, horizon);

    std::ostringstream metrics, rollups, trace;
    for (const auto& t : twins) {
        for (const auto& code : t.applicable_metrics()) {
            metrics << metric_to_tsv(t.member_id(), t.compute_metric(code, 0, horizon)) << '\n';
        }
    }
    for (const auto& r : scdt.rollups(0, horizon)) rollups << metric_to_tsv("system", r) << '\n';
    for (const auto& e : scdt.bus().trace()) trace << trace_to_tsv(e) << '\n';
    const auto quality = evaluate_quality(quality_inputs(scdt.bus()));
    const auto sos = assess_sos(in.system, g);
    const auto quadrant = classify_quadrant(g.feature);

    std::ostringstream sos_text;
    sos_text << "quadrant " << to_string(quadrant) << '\t' << quadrant_label(quadrant) << '\n';
    sos_text << "pattern " << to_string(g.pattern.pattern) << '\n';
    sos_text << sos.render();

    fs::create_directories(manifest.out);
    RunSummary summary;
    summary.out = manifest.out;
    summary.events = log.size();
    summary.events_hash = log.hash();
    auto emit = [&](const std::string& name, const std::string& text) {
        write_file(manifest.out / name, text);
        summary.files.push_back(name);
    };
    emit("structure.txt", block_structure(in.system));
    emit("validation.txt", in.validation.render());
    emit("events.tsv", log.to_tsv());
    emit("metrics.tsv", metrics.str());
    emit("divergence.tsv", divergence_tsv(twins, log));
    emit("rollups.tsv", rollups.str());
    emit("trace.tsv", trace.str());
    emit("quality.txt", quality.to_text());
    emit("sos.txt", sos_text.str());
    emit("report.txt", cmd_report(manifest));
    return summary;
}

std::string cmd_report(const RunManifest& manifest) {
    const auto system = load_topology_file(manifest.topology.string());
    const auto& dir = manifest.out;
    auto need = [&](const char* name) {
        const auto p = dir / name;
        if (!fs::exists(p)) io_error("missing run output '" + p.string() + "'; run the pipeline first");
        return read_file(p);
    };
    const auto events = need("events.tsv");
    const auto structure = need("structure.txt");
    const auto metrics = lines_of(need("metrics.tsv"));
    const auto divergence = lines_of(need("divergence.tsv"));
    const auto rollups = need("rollups.tsv");
    const auto quality = need("quality.txt");
    const auto sos = need("sos.txt");

    auto first_field = [](const std::string& line) { return line.substr(0, line.find('\t')); };
    auto rest = [](const std::string& line) {
        const auto tab = line.find('\t');
        return tab == std::string::npos ? std::string() : line.substr(tab + 1);
    };

    std::ostringstream out;
    out << "supply chain digital twin report\n";
    out << "events " << lines_of(events).size() << " hash " << hex64(fnv1a64(events)) << "\n";
    out << "members " << system.members.size() << " modules " << system.module_count() << "\n\n";
    out << "== block structure ==\n" << structure << "\n";
    out << "== members ==\n";
    for (const auto& m : system.members) {
        out << "[member " << m.id << "] role " << to_string(m.role.tag) << "\n";
        for (const auto& mod : m.modules) {
            out << "  module " << m.id << "/" << mod.id << " blocks";
            for (const auto& b : mod.blocks) out << " " << to_string(b.kind);
            out << "\n";
        }
        for (const auto& line : divergence) {
            if (first_field(line) == m.id) out << "  divergence\t" << rest(line) << "\n";
        }
        for (const auto& line : metrics) {
            if (first_field(line) == m.id) out << "  metric\t" << rest(line) << "\n";
        }
    }
    out << "\n== system rollups ==\n" << rollups;
    out << "\n== integration quality ==\n" << quality;
    out << "\n== system of systems ==\n" << sos;
    return out.str();
}

Perturbation parse_perturbation(const std::vector<std::string>& items) {
    Perturbation p;
    auto bad = [](const std::string& msg) { throw Error(ErrorKind::Parse, "cli_runner.BadPerturbation", msg); };
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) bad("expected KEY=FACTOR, got '" + item + "'");
        const auto key = item.substr(0, eq);
        Rational factor;
        try {
            factor = parse_rational(item.substr(eq + 1));
        } catch (const Error&) {
            bad("bad factor in '" + item + "'");
        }
        if (factor < 0) bad("negative factor in '" + item + "'");
        if (key == "demand") p.demand = factor;
        else if (key == "capacity") p.capacity = factor;
        else if (key == "lead_time" || key == "lead") p.lead_time = factor;
        else bad("unknown perturbation key '" + key + "' (demand, capacity, lead_time)");
    }
    return p;
}

std::optional<Rational> WhatIfRow::delta() const {
    if (!baseline || !predicted) return std::nullopt;
    return *predicted - *baseline;
}

std::vector<WhatIfRow> cmd_whatif(const RunManifest& manifest, const std::string& member,
                                  const Perturbation& perturbation) {
    const auto in = load_inputs(manifest);
    const auto& m = require_member(in.system, member);
    const auto events_path = manifest.out / "events.tsv";
    if (!fs::exists(events_path)) io_error("missing run output '" + events_path.string() + "'; run the pipeline first");
    const auto log = EventLog::from_tsv(read_file(events_path));

    SubDigitalTwin twin(m, in.catalog, in.scenario);
    for (const auto& e : log) {
        if (e.member == member) twin.ingest(e);
    }
    twin.flush();
    const auto base = twin.what_if(Perturbation{}, in.scenario.horizon);
    const auto pred = twin.what_if(perturbation, in.scenario.horizon);

    std::map<std::string, WhatIfRow> rows;
    for (const auto& v : base.metrics) {
        rows[v.code].code = v.code;
        rows[v.code].baseline = v.value;
    }
    for (const auto& v : pred.metrics) {
        rows[v.code].code = v.code;
        rows[v.code].predicted = v.value;
    }
    std::vector<WhatIfRow> out;
    for (auto& [code, row] : rows) out.push_back(std::move(row));
    return out;
}

std::string render_whatif(const std::string& member, const std::vector<WhatIfRow>& rows) {
    std::ostringstream out;
    out << "member\tmetric\tbaseline\tpredicted\tdelta\n";
    for (const auto& r : rows) {
        out << member << '\t' << r.code << '\t' << opt_fraction(r.baseline) << '\t' << opt_fraction(r.predicted) << '\t'
            << opt_fraction(r.delta()) << '\n';
    }
    return out.str();
}

} // namespace scdt
