#include "scdt/governance.hpp"

#include "yaml_util.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace scdt {

namespace {

constexpr const char* kModule = "sos_governance";

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
    throw Error(ErrorKind::Domain, std::string(kModule) + "." + code, msg);
}

const std::array<std::array<std::string, 5>, 5>& matrix() {
    static const std::array<std::array<std::string, 5>, 5> cells{{
        {"Goal alignment", "Let members freely form partnership", "Provide incentives measures",
         "Provide advice and support to each member", "Members work together"},
        {"Set common goal", "Keep strong links, help the needy",
         "Provide support to develop integration and collaboration",
         "Set mutually beneficial risk management schemes", "Take collaborative action"},
        {"Get connected on goals & functions", "Communicate to ensure all links are healthy",
         "Develop reliable connectivity", "Tight communication", "Connectivity is important"},
        {"Treasure member’s contribution", "Allow individual diverse functions",
         "Consider diversity issue in setting coordinated decisions", "Provide a risk scheme for all members",
         "different levels of participation"},
        {"Goal adjustment", "Regular checking and adjustment", "Set robust coordination schemes",
         "Identify threats from changes and responds", "Adjust schemes dynamically"},
    }};
    return cells;
}

void check_key(char feature, int principle) {
    if (kSosFeatures.find(feature) == std::string_view::npos || principle < 1 || principle > kPrincipleCount) {
        fail("UnknownCellKey", "no matrix cell (" + std::string(1, feature) + ", Principle " +
                                   std::to_string(principle) + ")");
    }
}

std::string pct(const std::optional<Rational>& v) { return v ? format_fraction(*v) : std::string("absent"); }

} // namespace

std::string_view sos_feature_name(char feature) {
    switch (feature) {
    case 'A': return "Autonomy";
    case 'B': return "Belonging";
    case 'C': return "Connectivity";
    case 'D': return "Diversity";
    case 'E': return "Emergence";
    default: fail("UnknownCellKey", "unknown SoS feature '" + std::string(1, feature) + "'");
    }
}

std::string_view principle_name(int principle) {
    switch (principle) {
    case 1: return "Setting goals and identifying contributions";
    case 2: return "Adopting the policy triage";
    case 3: return "Achieving coordination and integration";
    case 4: return "Managing risk to establish stability";
    case 5: return "Incorporating crowdsourcing";
    default: fail("UnknownCellKey", "unknown principle " + std::to_string(principle));
    }
}

const std::string& sos_cell_text(char feature, int principle) {
    check_key(feature, principle);
    return matrix()[kSosFeatures.find(feature)][principle - 1];
}

CellKey parse_cell_key(std::string_view text) {
    if (text.size() != 2 || text[1] < '0' || text[1] > '9') {
        fail("UnknownCellKey", "cell key must be a feature letter and a principle number: '" + std::string(text) + "'");
    }
    CellKey key{text[0], text[1] - '0'};
    check_key(key.feature, key.principle);
    return key;
}

std::size_t SosAssessment::satisfied() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const SosCell& c) { return c.status == CellStatus::Satisfied; }));
}

Rational SosAssessment::score() const {
    return Rational(static_cast<std::int64_t>(satisfied()), kPrincipleCount * static_cast<std::int64_t>(kSosFeatures.size()));
}

std::vector<SosCell> SosAssessment::missing() const {
    std::vector<SosCell> out;
    for (const auto& c : cells) {
        if (c.status == CellStatus::Missing) out.push_back(c);
    }
    return out;
}

std::string SosAssessment::render() const {
    std::ostringstream out;
    out << "score " << satisfied() << "/" << cells.size() << "\n";
    for (const auto& c : cells) {
        out << c.key.str() << "\t" << (c.status == CellStatus::Satisfied ? "Satisfied" : "Missing") << "\t" << c.text;
        if (c.evidence) out << "\t" << *c.evidence;
        out << "\n";
    }
    return out.str();
}

std::string_view to_string(Quadrant q) noexcept {
    switch (q) {
    case Quadrant::SharedMemoryIS: return "SharedMemoryIS";
    case Quadrant::TraditionalIS: return "TraditionalIS";
    case Quadrant::DataCentric: return "DataCentric";
    case Quadrant::AgentBased: return "AgentBased";
    }
    return "?";
}

std::string_view quadrant_label(Quadrant q) noexcept {
    switch (q) {
    case Quadrant::SharedMemoryIS: return "Information System with Shared Memory";
    case Quadrant::TraditionalIS: return "Traditional Information System";
    case Quadrant::DataCentric: return "Data-Centric System";
    case Quadrant::AgentBased: return "Agent-Based System";
    }
    return "?";
}

Quadrant classify_quadrant(DataSharing data, ControlMode control) noexcept {
    if (control == ControlMode::Hierarchical) {
        return data == DataSharing::Shared ? Quadrant::SharedMemoryIS : Quadrant::TraditionalIS;
    }
    return data == DataSharing::Shared ? Quadrant::DataCentric : Quadrant::AgentBased;
}

GovernanceConfig parse_governance(const std::string& document) {
    const auto root = yaml::parse_document(document, kModule);
    if (!root.IsMap()) yaml::parse_error(kModule, "governance document must be a mapping");
    GovernanceConfig g;

    auto fnode = root["feature"];
    if (!fnode || !fnode.IsMap()) yaml::parse_error(kModule, "missing 'feature' mapping");
    auto want = [&](const char* key) { return yaml::required_string(fnode, key, kModule); };
    const auto level = want("level");
    const auto exchange = want("exchange");
    const auto data = want("data_sharing");
    const auto control = want("control");
    auto l = parse_integration_level(level);
    auto x = parse_exchange_type(exchange);
    auto d = parse_data_sharing(data);
    auto c = parse_control_mode(control);
    if (!l) yaml::parse_error(kModule, "unknown integration level '" + level + "'");
    if (!x) yaml::parse_error(kModule, "unknown exchange type '" + exchange + "'");
    if (!d) yaml::parse_error(kModule, "unknown data sharing '" + data + "'");
    if (!c) yaml::parse_error(kModule, "unknown control mode '" + control + "'");
    g.feature = {*l, *x, *d, *c};

    g.pattern = parse_pattern_config(root["pattern"]);
    g.network = parse_network(root["network"]);
    g.sync_period = yaml::optional_int(root, "sync_period", kModule).value_or(100);
    if (g.sync_period <= 0) yaml::parse_error(kModule, "sync_period must be positive");

    if (auto ev = root["evidence"]) {
        if (!ev.IsMap()) yaml::parse_error(kModule, "evidence must map cell keys to references");
        for (const auto& kv : ev) {
            const auto key = parse_cell_key(yaml::scalar(kv.first, kModule, "evidence key"));
            g.evidence[key] = yaml::scalar(kv.second, kModule, "evidence reference");
        }
    }
    if (auto failures = root["failures"]) {
        if (!failures.IsSequence()) yaml::parse_error(kModule, "failures must be a list");
        for (const auto& f : failures) {
            g.failures.push_back({yaml::required_string(f, "member", kModule), yaml::required_int(f, "time", kModule)});
        }
    }
    return g;
}

GovernanceConfig load_governance_file(const std::string& path) {
    return parse_governance(yaml::read_text_file(path, kModule));
}

SosAssessment assess_sos(const SupplyChainSystem& system, const GovernanceConfig& config) {
    for (const auto& [key, ref] : config.evidence) check_key(key.feature, key.principle);
    SosAssessment a;
    for (char f : kSosFeatures) {
        for (int p = 1; p <= kPrincipleCount; ++p) {
            SosCell cell{{f, p}, sos_cell_text(f, p), std::nullopt, CellStatus::Missing};
            auto it = config.evidence.find(cell.key);
            if (it != config.evidence.end()) cell.evidence = it->second;
            else if (f == 'C' && p == 3 && config.pattern.reliability) cell.evidence = "auto: pattern reliability flag";
            else if (f == 'B' && p == 1 && !system.goal.empty()) cell.evidence = "auto: topology goal";
            if (cell.evidence) cell.status = CellStatus::Satisfied;
            a.cells.push_back(std::move(cell));
        }
    }
    return a;
}

PatternConfig pattern_template(PatternKind kind, ExchangeType exchange) {
    PatternConfig c;
    c.pattern = kind;
    c.exchanges = {exchange};
    switch (kind) {
    case PatternKind::PublishSubscribe: c.topics = {"events", "state"}; break;
    case PatternKind::Blackboard:
    case PatternKind::CollaborativeVirtualEnvironment: c.store = "store"; break;
    case PatternKind::DynamicRouter: c.rules.emplace(); break;
    case PatternKind::DataWarehouse:
    case PatternKind::BatchDataSynchronization: c.period = 10; break;
    default: break;
    }
    return c;
}

std::vector<PatternConfig> select_patterns(const IntegrationFeature& feature) {
    std::vector<PatternConfig> out;
    for (const auto& row : pattern_table()) {
        if (row.levels.count(feature.level) && row.exchanges.count(feature.exchange)) {
            out.push_back(pattern_template(row.kind, feature.exchange));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// quality

QualityReport evaluate_quality(const QualityInputs& in) {
    QualityReport r;
    r.empty_trace = in.traces.empty();
    r.manageability = in.manageability;
    r.scalability = in.scalability;

    std::int64_t failures = 0, notified = 0, delivered = 0, hops = 0, transfers = 0, attempts = 0, endpoint = 0;
    for (const auto& e : in.traces) {
        if (e.destination != "@dead-letter") ++attempts;
        if (e.outcome == Outcome::Delivered) {
            ++delivered;
            hops += e.hops;
            transfers += e.transfers;
            continue;
        }
        ++failures;
        if (e.notified) ++notified;
        if (e.cause == FailureCause::Endpoint) ++endpoint;
    }
    if (failures > 0) r.reliability = Rational(notified, failures);
    if (delivered > 0) {
        r.mean_hops = Rational(hops, delivered);
        r.mean_transfers = Rational(transfers, delivered);
    }
    if (attempts > 0) r.availability = Rational(1) - Rational(endpoint, attempts);

    std::set<std::string> keys;
    for (const auto& s : in.states) {
        for (const auto& [k, v] : s) keys.insert(k);
    }
    if (!keys.empty() && !in.traces.empty()) {
        std::int64_t agree = 0;
        for (const auto& k : keys) {
            const std::string* value = nullptr;
            bool ok = true;
            for (const auto& s : in.states) {
                auto it = s.find(k);
                if (it == s.end() || (value && *value != it->second.value)) {
                    ok = false;
                    break;
                }
                value = &it->second.value;
            }
            if (ok) ++agree;
        }
        r.consistency = Rational(agree, static_cast<std::int64_t>(keys.size()));
    }
    const auto checks = in.attestations_passed + in.attestations_failed;
    if (checks > 0) {
        r.security = Rational(static_cast<std::int64_t>(in.attestations_passed), static_cast<std::int64_t>(checks));
    }
    if (r.empty_trace) {
        r.reliability.reset();
        r.mean_hops.reset();
        r.mean_transfers.reset();
        r.availability.reset();
        r.consistency.reset();
    }
    return r;
}

std::string QualityReport::to_text() const {
    std::ostringstream out;
    out << "reliability=" << pct(reliability) << "\n";
    out << "performance.mean_hops=" << pct(mean_hops) << "\n";
    out << "performance.mean_transfers=" << pct(mean_transfers) << "\n";
    out << "availability=" << pct(availability) << "\n";
    out << "scalability=" << pct(scalability) << "\n";
    out << "manageability=" << manageability << "\n";
    out << "consistency=" << pct(consistency) << "\n";
    out << "security=" << pct(security) << "\n";
    out << "security.note=attestation pass rate only; checksums, not cryptographic signatures\n";
    out << "empty_trace=" << (empty_trace ? "true" : "false") << "\n";
    return out.str();
}

std::optional<Rational> scalability_probe(const std::vector<std::string>& members, const PatternConfig& config,
                                          const NetworkModel& network, int rounds) {
    std::vector<std::string> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() < 2) return std::nullopt;

    std::set<std::string> required;
    if (config.service) required.insert(*config.service);
    if (config.controller) required.insert(*config.controller);
    if (config.rules) {
        for (const auto& r : *config.rules) required.insert(r.destination);
    }
    std::vector<std::string> small(required.begin(), required.end());
    for (const auto& m : sorted) {
        if (small.size() >= 2) break;
        if (!required.count(m)) small.push_back(m);
    }

    auto rate = [&](const std::vector<std::string>& group) -> std::optional<Rational> {
        Bus bus = open_bus(group, config, network);
        const std::string topic = config.topics.empty() ? "probe" : config.topics.front();
        std::uint64_t id = 0;
        std::int64_t ok = 0, total = 0;
        for (int round = 0; round < rounds; ++round) {
            for (const auto& m : group) {
                auto msg = make_message(++id, m, topic, "probe " + std::to_string(round), round);
                if (config.rules && !config.rules->empty()) {
                    msg.attributes[config.rules->front().attribute] = config.rules->front().value;
                }
                for (const auto& e : bus.publish(msg)) {
                    ++total;
                    if (e.outcome == Outcome::Delivered) ++ok;
                }
            }
        }
        if (total == 0) return std::nullopt;
        return Rational(ok, total);
    };
    const auto base = rate(small);
    const auto full = rate(sorted);
    if (!base || !full || *base == Rational(0)) return std::nullopt;
    return std::min(Rational(1), *full / *base);
}

QualityInputs quality_inputs(const Bus& bus) {
    QualityInputs in;
    in.traces = bus.trace();
    for (const auto& [id, ep] : bus.endpoints()) in.states.push_back(ep.state);
    in.attestations_passed = bus.attestations_passed();
    in.attestations_failed = bus.attestations_failed();
    Bus probe = bus;
    std::string fresh = "probe-member";
    while (bus.endpoints().count(fresh)) fresh += "'";
    in.manageability = probe.add_member(fresh);
    std::vector<std::string> members;
    for (const auto& [id, ep] : bus.endpoints()) members.push_back(id);
    in.scalability = scalability_probe(members, bus.config(), bus.network());
    return in;
}

// ---------------------------------------------------------------------------
// integration

MetricValue rollup(const std::vector<MetricValue>& values, FormulaKind kind) {
    MetricValue out;
    if (!values.empty()) {
        out.code = values.front().code;
        out.t0 = values.front().t0;
        out.t1 = values.front().t1;
    }
    Rational weighted{0};
    for (const auto& v : values) {
        out.sample_count += v.sample_count;
        if (!v.value) continue;
        if (kind == FormulaKind::Cost) weighted += *v.value;
        else weighted += *v.value * Rational(v.sample_count);
    }
    if (kind == FormulaKind::Cost) out.value = weighted;
    else if (out.sample_count > 0) out.value = weighted / Rational(out.sample_count);
    return out;
}

std::vector<MetricValue> SCDTwin::rollups(Tick t0, Tick t1) const {
    std::map<std::string, std::vector<MetricValue>> by_code;
    std::map<std::string, FormulaKind> kinds;
    for (const auto* twin : twins_) {
        for (const auto& code : twin->applicable_metrics()) {
            by_code[code].push_back(twin->compute_metric(code, t0, t1));
            if (const auto* m = twin->catalog().find_metric(code)) kinds.emplace(code, m->formula_kind);
        }
    }
    std::vector<MetricValue> out;
    for (const auto& [code, values] : by_code) {
        auto it = kinds.find(code);
        out.push_back(rollup(values, it == kinds.end() ? FormulaKind::Ratio : it->second));
    }
    return out;
}

SCDTwin integrate(const std::vector<const SubDigitalTwin*>& twins, const PatternConfig& config,
                  const NetworkModel& network, const IntegrationFeature& feature) {
    const auto admissible = select_patterns(feature);
    if (std::none_of(admissible.begin(), admissible.end(),
                     [&](const PatternConfig& c) { return c.pattern == config.pattern; })) {
        fail("PatternFeatureMismatch", std::string(to_string(config.pattern)) + " does not support (" +
                                           std::string(to_string(feature.level)) + ", " +
                                           std::string(to_string(feature.exchange)) + ")");
    }
    std::vector<std::string> members;
    std::set<std::string> seen;
    for (const auto* t : twins) {
        if (!seen.insert(t->member_id()).second) fail("DuplicateMember", "two twins for '" + t->member_id() + "'");
        members.push_back(t->member_id());
    }
    PatternConfig effective = config;
    effective.exchanges.insert(feature.exchange);
    return SCDTwin(open_bus(members, effective, network), feature, twins);
}

} // namespace scdt
