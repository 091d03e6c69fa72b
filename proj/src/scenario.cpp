#include "scdt/emulator.hpp"

#include "yaml_util.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace scdt {

std::string_view to_string(DisruptionKind kind) noexcept {
    switch (kind) {
    case DisruptionKind::MemberOutage: return "MemberOutage";
    case DisruptionKind::CapacityDrop: return "CapacityDrop";
    case DisruptionKind::LeadTimeInflation: return "LeadTimeInflation";
    case DisruptionKind::DemandSurge: return "DemandSurge";
    }
    return "?";
}

std::optional<DisruptionKind> parse_disruption_kind(std::string_view text) noexcept {
    for (auto k : {DisruptionKind::MemberOutage, DisruptionKind::CapacityDrop, DisruptionKind::LeadTimeInflation,
                   DisruptionKind::DemandSurge}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

const Recipe* Scenario::recipe_for(std::string_view item) const {
    for (const auto& r : bom) {
        if (r.item == item) return &r;
    }
    return nullptr;
}

const ExternalSupply* Scenario::external_for(std::string_view item) const {
    for (const auto& e : external) {
        if (e.item == item) return &e;
    }
    return nullptr;
}

std::optional<Rational> Scenario::capacity_of(const EndpointRef& at) const {
    for (const auto& c : capacities) {
        if (c.at == at) return c.units_per_tick;
    }
    return std::nullopt;
}

namespace {

const ProcessParam* find_param(const std::vector<ProcessParam>& params, std::string_view member,
                               std::string_view process) {
    const ProcessParam* global = nullptr;
    for (const auto& p : params) {
        if (p.process != process) continue;
        if (p.member && *p.member == member) return &p;
        if (!p.member && !global) global = &p;
    }
    return global;
}

} // namespace

Tick Scenario::process_time(std::string_view member, std::string_view process) const {
    const auto* p = find_param(process_times, member, process);
    return p ? ceil_nonneg(p->value) : 0;
}

Rational Scenario::unit_cost(std::string_view member, std::string_view process) const {
    const auto* p = find_param(unit_costs, member, process);
    return p ? p->value : Rational(0);
}

// ---------------------------------------------------------------------------
// parsing

namespace {

const std::string kModule = "emulator";

[[noreturn]] void perr(const std::string& msg) { yaml::parse_error(kModule, msg); }

TickDistribution parse_distribution(const YAML::Node& node, const std::string& what) {
    if (node.IsScalar()) return TickDistribution::constant(yaml::int_scalar(node, kModule, what));
    if (node.IsMap()) {
        if (auto c = node["constant"]) return TickDistribution::constant(yaml::int_scalar(c, kModule, what));
        if (auto u = node["uniform"]) {
            if (!u.IsSequence() || u.size() != 2) perr(what + ": uniform takes [lo, hi]");
            auto lo = yaml::int_scalar(u[0], kModule, what);
            auto hi = yaml::int_scalar(u[1], kModule, what);
            if (hi < lo) perr(what + ": uniform bounds reversed");
            return TickDistribution::uniform(lo, hi);
        }
    }
    perr(what + ": expected an integer, {constant: n} or {uniform: [lo, hi]}");
}

EndpointRef parse_ref(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) perr("expected 'member/module', got '" + text + "'");
    return {text.substr(0, slash), text.substr(slash + 1)};
}

std::vector<ProcessParam> parse_params(const YAML::Node& root, const char* key, const char* value_key) {
    std::vector<ProcessParam> out;
    auto list = root[key];
    if (!list) return out;
    if (!list.IsSequence()) perr(std::string(key) + " must be a list");
    for (const auto& n : list) {
        ProcessParam p;
        p.process = yaml::required_string(n, "process", kModule);
        p.member = yaml::optional_string(n, "member", kModule);
        auto v = yaml::optional_rational(n, value_key, kModule);
        if (!v) perr(std::string(key) + " entry needs '" + value_key + "'");
        p.value = *v;
        out.push_back(std::move(p));
    }
    return out;
}

std::pair<Tick, Tick> parse_window(const YAML::Node& node) {
    auto w = node["window"];
    if (!w || !w.IsSequence() || w.size() != 2) perr("disruption window must be [start, end]");
    return {yaml::int_scalar(w[0], kModule, "window"), yaml::int_scalar(w[1], kModule, "window")};
}

} // namespace

Scenario parse_scenario(const std::string& document) {
    auto root = yaml::parse_document(document, kModule);
    if (!root.IsMap()) perr("scenario document must be a mapping");
    Scenario sc;
    sc.seed = static_cast<std::uint64_t>(yaml::optional_int(root, "seed", kModule).value_or(0));
    sc.horizon = yaml::required_int(root, "horizon", kModule);
    sc.quoted_lead_time = yaml::optional_int(root, "quoted_lead_time", kModule).value_or(sc.horizon);
    if (auto b = yaml::optional_int(root, "lost_sales_backlog", kModule)) sc.lost_sales_backlog = *b;
    if (auto d = root["default_lead_time"]) sc.default_lead_time = parse_distribution(d, "default_lead_time");

    if (auto bom = root["bom"]) {
        if (!bom.IsSequence()) perr("bom must be a list");
        for (const auto& n : bom) {
            Recipe r;
            r.item = yaml::required_string(n, "item", kModule);
            r.made_by = yaml::required_string(n, "made_by", kModule);
            if (auto in = n["inputs"]) {
                if (!in.IsMap()) perr("bom inputs must be a mapping item -> units");
                for (const auto& kv : in) {
                    r.inputs[kv.first.as<std::string>()] = yaml::int_scalar(kv.second, kModule, "bom input");
                }
            }
            sc.bom.push_back(std::move(r));
        }
    }
    if (auto ext = root["external"]) {
        if (!ext.IsSequence()) perr("external must be a list");
        for (const auto& n : ext) {
            ExternalSupply e;
            e.item = yaml::required_string(n, "item", kModule);
            if (auto l = n["lead_time"]) e.lead_time = parse_distribution(l, "external lead_time");
            sc.external.push_back(std::move(e));
        }
    }
    if (auto demand = root["demand"]) {
        if (!demand.IsSequence()) perr("demand must be a list");
        for (const auto& n : demand) {
            DemandSpec d;
            d.member = yaml::required_string(n, "member", kModule);
            d.item = yaml::required_string(n, "item", kModule);
            d.rate = yaml::optional_rational(n, "rate", kModule);
            d.period = yaml::optional_int(n, "period", kModule);
            d.offset = yaml::optional_int(n, "offset", kModule).value_or(0);
            if (d.rate.has_value() == d.period.has_value()) perr("demand entry needs exactly one of rate/period");
            if (auto q = n["quantity"]) d.quantity = parse_distribution(q, "demand quantity");
            if (auto l = n["delivery_lead_time"]) d.delivery_lead_time = parse_distribution(l, "delivery_lead_time");
            sc.demand.push_back(std::move(d));
        }
    }
    if (auto caps = root["capacities"]) {
        if (!caps.IsSequence()) perr("capacities must be a list");
        for (const auto& n : caps) {
            CapacitySpec c;
            c.at = parse_ref(yaml::required_string(n, "at", kModule));
            auto u = yaml::optional_rational(n, "units_per_tick", kModule);
            if (!u) perr("capacity entry needs units_per_tick");
            c.units_per_tick = *u;
            sc.capacities.push_back(std::move(c));
        }
    }
    if (auto leads = root["lead_times"]) {
        if (!leads.IsSequence()) perr("lead_times must be a list");
        for (const auto& n : leads) {
            LeadTimeSpec l;
            l.from = parse_ref(yaml::required_string(n, "from", kModule));
            l.to = parse_ref(yaml::required_string(n, "to", kModule));
            auto t = n["ticks"];
            if (!t) perr("lead_times entry needs ticks");
            l.ticks = parse_distribution(t, "lead ticks");
            sc.lead_times.push_back(std::move(l));
        }
    }
    sc.process_times = parse_params(root, "process_times", "ticks");
    sc.unit_costs = parse_params(root, "unit_costs", "cost");
    if (auto rr = root["return_rates"]) {
        if (!rr.IsMap()) perr("return_rates must be a mapping member -> probability");
        for (const auto& kv : rr) {
            sc.return_rates[kv.first.as<std::string>()] = yaml::rational_scalar(kv.second, kModule, "return rate");
        }
    }
    if (auto ds = root["disruptions"]) {
        if (!ds.IsSequence()) perr("disruptions must be a list");
        for (const auto& n : ds) {
            Disruption d;
            const auto kind = yaml::required_string(n, "kind", kModule);
            auto k = parse_disruption_kind(kind);
            if (!k) perr("unknown disruption kind '" + kind + "'");
            d.kind = *k;
            d.target = yaml::required_string(n, "target", kModule);
            std::tie(d.start, d.end) = parse_window(n);
            d.magnitude = yaml::optional_rational(n, "magnitude", kModule).value_or(Rational(1));
            sc.disruptions.push_back(std::move(d));
        }
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    return parse_scenario(yaml::read_text_file(path, kModule));
}

// ---------------------------------------------------------------------------
// validation

namespace {

[[noreturn]] void bad(const std::string& code, const std::string& msg) {
    throw Error(ErrorKind::Domain, "emulator." + code, msg);
}

void check_distribution(const TickDistribution& d, const std::string& what) {
    if (d.lo < 0 || d.hi < d.lo) bad("BadScenario", what + " must be a nonnegative range");
}

void check_disruption(const Disruption& d, Tick horizon) {
    if (!(d.start >= 0 && d.start < d.end && d.end <= horizon)) {
        bad("WindowOutOfRange", std::string(to_string(d.kind)) + " window [" + std::to_string(d.start) + "," +
                                    std::to_string(d.end) + ") outside [0," + std::to_string(horizon) + ")");
    }
    if (d.magnitude < 0) bad("BadScenario", "disruption magnitude must be nonnegative");
    if (d.kind == DisruptionKind::CapacityDrop && d.magnitude > 1) {
        bad("BadScenario", "capacity drop magnitude must lie in [0,1]");
    }
}

} // namespace

void validate_scenario(const Scenario& sc) {
    if (sc.horizon <= 0) bad("BadScenario", "horizon must be positive");
    if (sc.quoted_lead_time < 0) bad("BadScenario", "quoted_lead_time must be nonnegative");
    if (sc.lost_sales_backlog && *sc.lost_sales_backlog < 0) bad("BadScenario", "lost_sales_backlog must be >= 0");
    check_distribution(sc.default_lead_time, "default_lead_time");
    for (const auto& d : sc.demand) {
        if (d.rate && (*d.rate < 0 || *d.rate > 1)) bad("BadScenario", "demand rate must lie in [0,1]");
        if (d.period && *d.period <= 0) bad("BadScenario", "demand period must be positive");
        if (d.offset < 0) bad("BadScenario", "demand offset must be nonnegative");
        check_distribution(d.quantity, "demand quantity");
        check_distribution(d.delivery_lead_time, "delivery_lead_time");
    }
    for (const auto& c : sc.capacities) {
        if (c.units_per_tick <= 0) bad("BadScenario", "capacity at " + c.at.str() + " must be positive");
    }
    for (const auto& l : sc.lead_times) check_distribution(l.ticks, "lead time");
    for (const auto& e : sc.external) check_distribution(e.lead_time, "external lead time");
    for (const auto& p : sc.process_times) {
        if (p.value < 0) bad("BadScenario", "process time must be nonnegative");
    }
    for (const auto& p : sc.unit_costs) {
        if (p.value < 0) bad("BadScenario", "unit cost must be nonnegative");
    }
    for (const auto& [member, rate] : sc.return_rates) {
        if (rate < 0 || rate > 1) bad("BadScenario", "return rate for " + member + " must lie in [0,1]");
    }
    std::set<std::string> items;
    for (const auto& r : sc.bom) {
        if (!items.insert(r.item).second) bad("BadScenario", "item '" + r.item + "' has two recipes");
        for (const auto& [input, units] : r.inputs) {
            if (units <= 0) bad("BadScenario", "recipe inputs must be positive");
        }
    }
    // BOM acyclicity: depth-first search with colouring.
    std::map<std::string, int> colour;
    std::function<void(const std::string&)> visit = [&](const std::string& item) {
        auto& c = colour[item];
        if (c == 2) return;
        if (c == 1) bad("CyclicBOM", "recipe cycle through item '" + item + "'");
        c = 1;
        if (const auto* r = sc.recipe_for(item)) {
            for (const auto& [input, units] : r->inputs) visit(input);
        }
        colour[item] = 2;
    };
    for (const auto& r : sc.bom) visit(r.item);
    for (const auto& d : sc.disruptions) check_disruption(d, sc.horizon);
}

Scenario inject_disruption(const Scenario& scenario, const Disruption& disruption) {
    check_disruption(disruption, scenario.horizon);
    Scenario out = scenario;
    out.disruptions.push_back(disruption);
    return out;
}

} // namespace scdt
