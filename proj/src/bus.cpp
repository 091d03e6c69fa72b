#include "scdt/bus.hpp"

#include "scdt/rng.hpp"
#include "yaml_util.hpp"

#include <algorithm>
#include <tuple>

namespace scdt {

namespace {

constexpr const char* kModule = "bus";

[[noreturn]] void fail(const std::string& code, const std::string& msg, ErrorKind kind = ErrorKind::Domain) {
    throw Error(kind, std::string(kModule) + "." + code, msg);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, s.find_last_not_of(" \t") - b + 1));
}

bool service_pattern(PatternKind p) {
    return p == PatternKind::ServiceOrientedArchitecture || p == PatternKind::RemoteFacade ||
           p == PatternKind::RemoteProcessInvocation;
}

bool periodic_pattern(PatternKind p) {
    return p == PatternKind::DataWarehouse || p == PatternKind::BatchDataSynchronization;
}

} // namespace

std::string_view to_string(Outcome v) noexcept {
    switch (v) {
    case Outcome::Delivered: return "Delivered";
    case Outcome::Dropped: return "Dropped";
    case Outcome::FailedNotified: return "FailedNotified";
    }
    return "?";
}

std::string_view to_string(FailureCause v) noexcept {
    switch (v) {
    case FailureCause::None: return "None";
    case FailureCause::Network: return "Network";
    case FailureCause::Endpoint: return "Endpoint";
    case FailureCause::Attestation: return "Attestation";
    case FailureCause::NoRoute: return "NoRoute";
    }
    return "?";
}

RouteRule parse_route_rule(std::string_view text) {
    const auto arrow = text.find("->");
    const auto eq = text.find('=');
    if (arrow == std::string_view::npos || eq == std::string_view::npos || eq > arrow) {
        fail("BadPatternConfig", "route rule must read 'attribute=value -> destination': '" + std::string(text) + "'");
    }
    RouteRule r{trim(text.substr(0, eq)), trim(text.substr(eq + 1, arrow - eq - 1)), trim(text.substr(arrow + 2))};
    if (r.attribute.empty() || r.destination.empty()) {
        fail("BadPatternConfig", "route rule has an empty side: '" + std::string(text) + "'");
    }
    return r;
}

PatternConfig parse_pattern_config(const YAML::Node& node) {
    if (!node || !node.IsMap()) yaml::parse_error(kModule, "pattern config must be a mapping");
    PatternConfig c;
    const auto name = yaml::required_string(node, "pattern", kModule);
    auto kind = parse_pattern_kind(name);
    if (!kind) fail("BadPatternConfig", "unknown pattern '" + name + "'");
    c.pattern = *kind;
    if (node["exchanges"]) {
        c.exchanges.clear();
        for (const auto& x : yaml::string_list(node, "exchanges", kModule)) {
            auto ex = parse_exchange_type(x);
            if (!ex) fail("BadPatternConfig", "unknown exchange type '" + x + "'");
            c.exchanges.insert(*ex);
        }
    }
    c.reliability = yaml::optional_bool(node, "reliability", kModule).value_or(true);
    c.topics = yaml::string_list(node, "topics", kModule);
    c.store = yaml::optional_string(node, "store", kModule);
    c.service = yaml::optional_string(node, "service", kModule);
    if (node["rules"]) {
        c.rules.emplace();
        for (const auto& r : yaml::string_list(node, "rules", kModule)) c.rules->push_back(parse_route_rule(r));
    }
    c.period = yaml::optional_int(node, "period", kModule).value_or(0);
    c.controller = yaml::optional_string(node, "controller", kModule);
    return c;
}

Tick NetworkModel::link(const std::string& from, const std::string& to) const {
    auto it = latency.find({from, to});
    return it == latency.end() ? default_latency : it->second;
}

bool NetworkModel::down(const std::string& member, Tick t) const {
    return std::any_of(outages.begin(), outages.end(),
                       [&](const Outage& o) { return o.member == member && t >= o.start && t < o.end; });
}

NetworkModel parse_network(const YAML::Node& node) {
    NetworkModel n;
    if (!node) return n;
    if (!node.IsMap()) yaml::parse_error(kModule, "network must be a mapping");
    n.default_latency = yaml::optional_int(node, "default_latency", kModule).value_or(1);
    n.hub_latency = yaml::optional_int(node, "hub_latency", kModule).value_or(1);
    n.drop_probability = yaml::optional_rational(node, "drop_probability", kModule).value_or(Rational(0));
    n.seed = static_cast<std::uint64_t>(yaml::optional_int(node, "seed", kModule).value_or(0));
    if (auto links = node["latency"]) {
        for (const auto& l : links) {
            n.latency[{yaml::required_string(l, "from", kModule), yaml::required_string(l, "to", kModule)}] =
                yaml::required_int(l, "ticks", kModule);
        }
    }
    if (auto outages = node["outages"]) {
        for (const auto& o : outages) {
            auto w = o["window"];
            if (!w || !w.IsSequence() || w.size() != 2) yaml::parse_error(kModule, "outage window must be [start, end]");
            n.outages.push_back({yaml::required_string(o, "member", kModule), yaml::int_scalar(w[0], kModule, "window"),
                                 yaml::int_scalar(w[1], kModule, "window")});
        }
    }
    if (n.drop_probability < Rational(0) || n.drop_probability > Rational(1)) {
        fail("BadNetwork", "drop_probability must lie in [0, 1]");
    }
    if (n.default_latency < 0 || n.hub_latency < 0) fail("BadNetwork", "latencies must be non-negative");
    for (const auto& [k, v] : n.latency) {
        if (v < 0) fail("BadNetwork", "latencies must be non-negative");
    }
    for (const auto& o : n.outages) {
        if (o.end <= o.start) fail("BadNetwork", "outage window for '" + o.member + "' is empty");
    }
    return n;
}

std::uint64_t attest(const std::string& source, const std::string& body) { return fnv1a64(source + "\n" + body); }

BusMessage make_message(std::uint64_t id, std::string source, std::string topic, std::string body, Tick time) {
    BusMessage m;
    m.id = id;
    m.source = std::move(source);
    m.topic = std::move(topic);
    m.body = std::move(body);
    m.attestation = attest(m.source, m.body);
    m.time = time;
    return m;
}

std::string trace_to_tsv(const TraceEntry& e) {
    return std::to_string(e.msg_id) + "\t" + e.kind + "\t" + e.source + "\t" + e.destination + "\t" +
           std::to_string(e.hops) + "\t" + std::to_string(e.transfers) + "\t" + std::to_string(e.enqueue) + "\t" +
           (e.deliver ? std::to_string(*e.deliver) : std::string("-")) + "\t" + std::to_string(e.path_latency) +
           "\t" + std::string(to_string(e.outcome)) + "\t" + std::string(to_string(e.cause)) + "\t" +
           (e.notified ? "1" : "0");
}

std::string encode_state(const SharedState& state) {
    std::string out;
    for (const auto& [key, v] : state) {
        out += key + "=" + v.value + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bus

Bus open_bus(const std::vector<std::string>& members, const PatternConfig& config, const NetworkModel& network) {
    const auto& row = pattern_row(config.pattern);
    auto bad = [&](const std::string& msg) { fail("BadPatternConfig", std::string(to_string(config.pattern)) + ": " + msg); };
    if (config.exchanges.empty()) bad("no exchange types configured");
    for (auto x : config.exchanges) {
        if (!row.exchanges.count(x)) bad("exchange type " + std::string(to_string(x)) + " is not supported by the pattern");
    }
    std::set<std::string> ids(members.begin(), members.end());
    if (ids.size() != members.size()) bad("duplicate member id");
    switch (config.pattern) {
    case PatternKind::PublishSubscribe:
        if (config.topics.empty()) bad("topics required");
        break;
    case PatternKind::Blackboard:
    case PatternKind::CollaborativeVirtualEnvironment:
        if (!config.store || config.store->empty()) bad("shared store required");
        break;
    case PatternKind::DynamicRouter:
        if (!config.rules) bad("rules required (may be empty)");
        for (const auto& r : *config.rules) {
            if (!ids.count(r.destination)) bad("rule destination '" + r.destination + "' is not a member");
        }
        break;
    case PatternKind::ServiceOrientedArchitecture:
    case PatternKind::RemoteFacade:
    case PatternKind::RemoteProcessInvocation:
        if (!config.service) bad("service member required");
        if (!ids.count(*config.service)) bad("service '" + *config.service + "' is not a member");
        break;
    case PatternKind::DataWarehouse:
    case PatternKind::BatchDataSynchronization:
        if (config.period <= 0) bad("period must be positive");
        break;
    case PatternKind::CanonicalDataModel: break;
    }
    if (config.exchanges.count(ExchangeType::Control)) {
        if (!config.controller) bad("Control exchange needs a controller");
        if (!ids.count(*config.controller)) bad("controller '" + *config.controller + "' is not a member");
    }

    Bus bus;
    bus.config_ = config;
    bus.network_ = network;
    for (const auto& m : members) {
        Endpoint e;
        e.member = m;
        e.subscriptions.insert(config.topics.begin(), config.topics.end());
        bus.endpoints_.emplace(m, std::move(e));
    }
    return bus;
}

const Endpoint& Bus::endpoint(const std::string& member) const {
    auto it = endpoints_.find(member);
    if (it == endpoints_.end()) fail("UnknownEndpoint", "no endpoint for '" + member + "'");
    return it->second;
}

void Bus::require(ExchangeType exchange) const {
    if (!config_.exchanges.count(exchange)) {
        fail("PatternUnsupported", std::string(to_string(config_.pattern)) + " is not configured for " +
                                       std::string(to_string(exchange)));
    }
}

std::string Bus::hub_name() const {
    if (service_pattern(config_.pattern)) return *config_.service;
    switch (config_.pattern) {
    case PatternKind::Blackboard:
    case PatternKind::CollaborativeVirtualEnvironment: return "@" + *config_.store;
    case PatternKind::CanonicalDataModel: return "@translator";
    case PatternKind::DynamicRouter: return "@router";
    case PatternKind::DataWarehouse: return "@warehouse";
    case PatternKind::BatchDataSynchronization: return "@batch";
    default: return "@broker";
    }
}

TraceEntry Bus::attempt(const std::string& kind, const BusMessage& message, const Leg& leg) {
    TraceEntry e;
    e.msg_id = message.id;
    e.kind = kind;
    e.source = message.source;
    e.destination = leg.destination;
    e.hops = leg.hops;
    e.transfers = leg.transfers;
    e.enqueue = message.time;
    e.path_latency = network_.link(message.source, leg.destination) + (leg.hops - 1) * network_.hub_latency;
    Tick arrive = e.enqueue + e.path_latency;
    if (periodic_pattern(config_.pattern)) arrive = (arrive + config_.period - 1) / config_.period * config_.period;

    const bool dropped = CounterRng::stream(network_.seed, "bus", "drop").bernoulli(network_.drop_probability, attempts_++);
    bool endpoint_down = network_.down(leg.destination, arrive);
    auto pending = pending_failures_.find(leg.destination);
    if (pending != pending_failures_.end() && pending->second > 0) {
        --pending->second;
        endpoint_down = true;
    }
    if (endpoint_down) {
        e.cause = FailureCause::Endpoint;
        e.outcome = config_.reliability ? Outcome::FailedNotified : Outcome::Dropped;
        e.notified = config_.reliability;
    } else if (dropped) {
        e.cause = FailureCause::Network;
        e.outcome = Outcome::Dropped;
        e.notified = config_.reliability;
    } else {
        e.deliver = arrive;
    }
    trace_.push_back(e);
    return e;
}

std::vector<TraceEntry> Bus::publish(const BusMessage& message) {
    if (!endpoints_.count(message.source)) fail("UnknownEndpoint", "no endpoint for '" + message.source + "'");
    std::vector<TraceEntry> out;
    auto dead_letter = [&](FailureCause cause) {
        dead_letters_.push_back(message);
        TraceEntry e;
        e.msg_id = message.id;
        e.kind = "publish";
        e.source = message.source;
        e.destination = "@dead-letter";
        e.enqueue = message.time;
        e.outcome = Outcome::Dropped;
        e.cause = cause;
        e.notified = config_.reliability || cause == FailureCause::Attestation;
        trace_.push_back(e);
        out.push_back(e);
    };
    if (attest(message.source, message.body) != message.attestation) {
        ++attest_fail_;
        dead_letter(FailureCause::Attestation);
        fail("AttestationFailure", "message " + std::to_string(message.id) + " from '" + message.source +
                                       "' does not match its attestation");
    }
    ++attest_pass_;

    std::vector<Leg> legs;
    auto others = [&](int hops, int transfers) {
        for (const auto& [id, ep] : endpoints_) {
            if (id == message.source) continue;
            if (message.destination && id != *message.destination) continue;
            legs.push_back({id, hops, transfers});
        }
    };
    switch (config_.pattern) {
    case PatternKind::PublishSubscribe:
        if (std::find(config_.topics.begin(), config_.topics.end(), message.topic) == config_.topics.end()) {
            dead_letter(FailureCause::NoRoute);
            return out;
        }
        for (const auto& [id, ep] : endpoints_) {
            if (id == message.source || !ep.subscriptions.count(message.topic)) continue;
            if (message.destination && id != *message.destination) continue;
            legs.push_back({id, 2, 2});
        }
        break;
    case PatternKind::DynamicRouter: {
        std::set<std::string> dests;
        try {
            dests = route(message);
        } catch (const Error& err) {
            if (err.code() != "bus.NoMatchingRule") throw;
            dead_letter(FailureCause::NoRoute);
            return out;
        }
        for (const auto& d : dests) legs.push_back({d, 2, 2});
        break;
    }
    case PatternKind::ServiceOrientedArchitecture:
    case PatternKind::RemoteFacade:
    case PatternKind::RemoteProcessInvocation:
        if (message.source == *config_.service) others(1, 2);
        else legs.push_back({*config_.service, 1, 2});
        break;
    default: others(2, 2); break;
    }

    for (const auto& leg : legs) {
        auto e = attempt("publish", message, leg);
        if (e.outcome == Outcome::Delivered) endpoints_.at(leg.destination).inbox.push_back(message);
        out.push_back(std::move(e));
    }
    return out;
}

std::set<std::string> Bus::route(const BusMessage& message) const {
    if (config_.pattern != PatternKind::DynamicRouter) {
        fail("PatternUnsupported", "route needs the DynamicRouter pattern");
    }
    std::set<std::string> out;
    for (const auto& r : config_.rules.value_or(std::vector<RouteRule>{})) {
        auto it = message.attributes.find(r.attribute);
        if (it != message.attributes.end() && it->second == r.value) out.insert(r.destination);
    }
    if (out.empty()) fail("NoMatchingRule", "no rule matches message " + std::to_string(message.id));
    return out;
}

void Bus::update(const std::string& member, const std::string& key, const std::string& value) {
    auto it = endpoints_.find(member);
    if (it == endpoints_.end()) fail("UnknownEndpoint", "no endpoint for '" + member + "'");
    auto& slot = it->second.state[key];
    slot.value = value;
    ++slot.version[member];
    ++slot.lamport;
    slot.writer = member;
}

bool Bus::merge_into(SharedState& target, const SharedState& incoming) {
    bool changed = false;
    auto rank = [&](const VersionedValue& v) {
        const bool ctrl = config_.exchanges.count(ExchangeType::Control) && config_.controller &&
                          v.writer == *config_.controller;
        return std::make_tuple(ctrl, v.lamport, v.writer, v.value);
    };
    for (const auto& [key, in] : incoming) {
        auto it = target.find(key);
        if (it == target.end()) {
            target.emplace(key, in);
            changed = true;
            continue;
        }
        auto& cur = it->second;
        if (cur == in) continue;
        bool in_ge = true, cur_ge = true;
        std::set<std::string> writers;
        for (const auto& [w, n] : cur.version) writers.insert(w);
        for (const auto& [w, n] : in.version) writers.insert(w);
        std::map<std::string, std::uint64_t> joined;
        for (const auto& w : writers) {
            const auto a = cur.version.count(w) ? cur.version.at(w) : 0;
            const auto b = in.version.count(w) ? in.version.at(w) : 0;
            if (a > b) in_ge = false;
            if (b > a) cur_ge = false;
            joined[w] = std::max(a, b);
        }
        if (!in_ge && !cur_ge) ++conflicts_;
        VersionedValue next = rank(in) > rank(cur) ? in : cur;
        next.version = std::move(joined);
        if (!(next == cur)) {
            cur = std::move(next);
            changed = true;
        }
    }
    return changed;
}

std::vector<TraceEntry> Bus::sync_round(Tick time) {
    require(ExchangeType::Sync);
    std::vector<TraceEntry> out;
    std::map<std::string, SharedState> before;
    for (const auto& [id, ep] : endpoints_) before[id] = ep.state;

    if (config_.pattern == PatternKind::PublishSubscribe) {
        for (const auto& [src, state] : before) {
            auto msg = make_message(next_id(), src, "sync", encode_state(state), time);
            for (const auto& [dst, ep] : endpoints_) {
                if (dst == src) continue;
                auto e = attempt("sync", msg, {dst, 2, 2});
                if (e.outcome == Outcome::Delivered) merge_into(endpoints_.at(dst).state, state);
                out.push_back(std::move(e));
            }
        }
        return out;
    }

    const auto hub = hub_name();
    const bool member_hub = endpoints_.count(hub) > 0;
    SharedState& store = member_hub ? endpoints_.at(hub).state : hub_;
    for (const auto& [src, state] : before) {
        if (src == hub) continue;
        auto msg = make_message(next_id(), src, "sync-push", encode_state(state), time);
        auto e = attempt("sync-push", msg, {hub, 1, 1});
        if (e.outcome == Outcome::Delivered) merge_into(store, state);
        out.push_back(std::move(e));
    }
    const SharedState merged = store;
    for (auto& [dst, ep] : endpoints_) {
        if (dst == hub) continue;
        auto msg = make_message(next_id(), hub, "sync-pull", encode_state(merged), time);
        auto e = attempt("sync-pull", msg, {dst, 1, 1});
        if (e.outcome == Outcome::Delivered) merge_into(ep.state, merged);
        out.push_back(std::move(e));
    }
    return out;
}

bool Bus::negotiate(const std::string& proposer, const std::string& key, const std::string& value, Tick time) {
    if (config_.pattern != PatternKind::PublishSubscribe) {
        fail("PatternUnsupported", "negotiation is realized only over PublishSubscribe");
    }
    require(ExchangeType::Negotiation);
    if (!endpoints_.count(proposer)) fail("UnknownEndpoint", "no endpoint for '" + proposer + "'");
    auto proposal = make_message(next_id(), proposer, "propose", key + "=" + value, time);
    bool accepted = true;
    for (const auto& [dst, ep] : endpoints_) {
        if (dst == proposer) continue;
        if (attempt("propose", proposal, {dst, 2, 2}).outcome != Outcome::Delivered) accepted = false;
    }
    if (!accepted) return false;
    update(proposer, key, value);
    SharedState slot{{key, endpoints_.at(proposer).state.at(key)}};
    auto commit = make_message(next_id(), proposer, "commit", encode_state(slot), time);
    for (auto& [dst, ep] : endpoints_) {
        if (dst == proposer) continue;
        if (attempt("commit", commit, {dst, 2, 2}).outcome == Outcome::Delivered) merge_into(ep.state, slot);
    }
    return true;
}

void Bus::inject_endpoint_failure(const std::string& member) {
    if (!endpoints_.count(member)) fail("UnknownEndpoint", "no endpoint for '" + member + "'");
    ++pending_failures_[member];
}

std::size_t Bus::add_member(const std::string& member) {
    if (endpoints_.count(member)) fail("BadPatternConfig", "member '" + member + "' already has an endpoint");
    Endpoint e;
    e.member = member;
    e.subscriptions.insert(config_.topics.begin(), config_.topics.end());
    endpoints_.emplace(member, std::move(e));
    std::size_t touched = 1;
    if (config_.pattern == PatternKind::PublishSubscribe) touched += config_.topics.size();
    else touched += 1; // store grant, service binding, route rule, translator mapping or schedule entry
    return touched;
}

} // namespace scdt
