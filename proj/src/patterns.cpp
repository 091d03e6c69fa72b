#include "scdt/patterns.hpp"

#include "scdt/core.hpp"

#include <sstream>

namespace scdt {

std::string_view to_string(IntegrationLevel v) noexcept {
    switch (v) {
    case IntegrationLevel::Data: return "Data";
    case IntegrationLevel::Service: return "Service";
    case IntegrationLevel::BusinessProcess: return "BusinessProcess";
    }
    return "?";
}

std::string_view to_string(ExchangeType v) noexcept {
    switch (v) {
    case ExchangeType::Inform: return "Inform";
    case ExchangeType::Sync: return "Sync";
    case ExchangeType::Control: return "Control";
    case ExchangeType::Negotiation: return "Negotiation";
    }
    return "?";
}

std::string_view to_string(DataSharing v) noexcept { return v == DataSharing::Shared ? "Shared" : "Isolated"; }

std::string_view to_string(ControlMode v) noexcept {
    return v == ControlMode::Hierarchical ? "Hierarchical" : "Autonomous";
}

std::string_view to_string(PatternKind v) noexcept {
    switch (v) {
    case PatternKind::ServiceOrientedArchitecture: return "ServiceOrientedArchitecture";
    case PatternKind::PublishSubscribe: return "PublishSubscribe";
    case PatternKind::CanonicalDataModel: return "CanonicalDataModel";
    case PatternKind::DynamicRouter: return "DynamicRouter";
    case PatternKind::Blackboard: return "Blackboard";
    case PatternKind::DataWarehouse: return "DataWarehouse";
    case PatternKind::CollaborativeVirtualEnvironment: return "CollaborativeVirtualEnvironment";
    case PatternKind::RemoteFacade: return "RemoteFacade";
    case PatternKind::RemoteProcessInvocation: return "RemoteProcessInvocation";
    case PatternKind::BatchDataSynchronization: return "BatchDataSynchronization";
    }
    return "?";
}

std::optional<IntegrationLevel> parse_integration_level(std::string_view text) noexcept {
    if (text == "Business process") return IntegrationLevel::BusinessProcess;
    for (auto v : kAllLevels) {
        if (text == to_string(v)) return v;
    }
    return std::nullopt;
}

std::optional<ExchangeType> parse_exchange_type(std::string_view text) noexcept {
    for (auto v : kAllExchanges) {
        if (text == to_string(v)) return v;
    }
    return std::nullopt;
}

std::optional<DataSharing> parse_data_sharing(std::string_view text) noexcept {
    if (text == "Shared") return DataSharing::Shared;
    if (text == "Isolated") return DataSharing::Isolated;
    return std::nullopt;
}

std::optional<ControlMode> parse_control_mode(std::string_view text) noexcept {
    if (text == "Hierarchical") return ControlMode::Hierarchical;
    if (text == "Autonomous") return ControlMode::Autonomous;
    return std::nullopt;
}

const std::vector<PatternRow>& pattern_table() {
    using L = IntegrationLevel;
    using X = ExchangeType;
    static const std::vector<PatternRow> rows{
        {PatternKind::ServiceOrientedArchitecture, "Service-Oriented Architecture",
         {L::Data, L::Service, L::BusinessProcess}, {X::Inform, X::Sync}, "Bass et al., 2003"},
        {PatternKind::PublishSubscribe, "Publish-Subscribe", {L::Data, L::Service, L::BusinessProcess},
         {X::Inform, X::Sync, X::Control, X::Negotiation}, "Bass et al., 2003"},
        {PatternKind::CanonicalDataModel, "Canonical Data Model", {L::Data}, {X::Inform, X::Sync},
         "Hohpe and Woolf, 2004"},
        {PatternKind::DynamicRouter, "Dynamic Router Pattern", {L::Data, L::Service}, {X::Inform, X::Sync},
         "Hohpe and Woolf, 2004"},
        {PatternKind::Blackboard, "Blackboard", {L::BusinessProcess}, {X::Inform, X::Sync}, "Buschmann et al., 2007"},
        {PatternKind::DataWarehouse, "Data Warehouse", {L::Data}, {X::Inform, X::Sync}, "Köppen et al., 2011"},
        {PatternKind::CollaborativeVirtualEnvironment, "Collaborative Virtual Environments", {L::BusinessProcess},
         {X::Sync, X::Control}, "Churchill et al., 2012"},
        {PatternKind::RemoteFacade, "Remote Facade", {L::Service}, {X::Inform, X::Sync}, "Fowler, 2012"},
        {PatternKind::RemoteProcessInvocation, "Remote Process Invocation", {L::Service}, {X::Sync},
         "Kazman et al., 2013"},
        {PatternKind::BatchDataSynchronization, "Batch Data Synchronization", {L::Data}, {X::Inform, X::Sync},
         "Kazman et al., 2013"},
    };
    return rows;
}

const PatternRow& pattern_row(PatternKind kind) {
    for (const auto& r : pattern_table()) {
        if (r.kind == kind) return r;
    }
    throw Error(ErrorKind::Domain, "patterns.UnknownPattern", std::string(to_string(kind)));
}

std::optional<PatternKind> parse_pattern_kind(std::string_view text) noexcept {
    for (const auto& r : pattern_table()) {
        if (text == to_string(r.kind) || text == r.name) return r.kind;
    }
    return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::vector<PatternRow> parse_pattern_table(const std::string& text) {
    std::vector<PatternRow> rows;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto perr = [&](const std::string& msg) {
        throw Error(ErrorKind::Parse, "patterns.ParseError", "line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line, '\t');
        if (f.size() != 4) perr("expected 4 tab-separated fields");
        if (lineno == 1 && f[0] == "Pattern") continue;
        PatternRow row;
        auto kind = parse_pattern_kind(f[0]);
        if (!kind) perr("unknown pattern '" + f[0] + "'");
        row.kind = *kind;
        row.name = f[0];
        for (const auto& l : split(f[1], '/')) {
            auto level = parse_integration_level(l);
            if (!level) perr("unknown integration level '" + l + "'");
            row.levels.insert(*level);
        }
        for (const auto& x : split(f[2], '/')) {
            auto ex = parse_exchange_type(x);
            if (!ex) perr("unknown exchange type '" + x + "'");
            row.exchanges.insert(*ex);
        }
        row.defined_by = f[3];
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace scdt
