#include "scdt/scor_catalog.hpp"

#include "yaml_util.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace scdt {

std::string_view to_string(FormulaKind kind) noexcept {
    switch (kind) {
    case FormulaKind::CycleTime: return "CycleTime";
    case FormulaKind::Cost: return "Cost";
    case FormulaKind::Ratio: return "Ratio";
    case FormulaKind::Utilization: return "Utilization";
    }
    return "?";
}

std::optional<FormulaKind> parse_formula_kind(std::string_view text) noexcept {
    for (auto k : {FormulaKind::CycleTime, FormulaKind::Cost, FormulaKind::Ratio, FormulaKind::Utilization}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

FormulaKind infer_formula_kind(std::string_view metric_name) {
    std::string lower(metric_name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.find("cycle time") != std::string::npos) return FormulaKind::CycleTime;
    if (lower.find("cost") != std::string::npos) return FormulaKind::Cost;
    if (lower.find("utilisation") != std::string::npos || lower.find("utilization") != std::string::npos) {
        return FormulaKind::Utilization;
    }
    return FormulaKind::Ratio;
}

namespace {

[[noreturn]] void fail(std::string code, const std::string& msg, ErrorKind kind = ErrorKind::Domain) {
    throw Error(kind, "scor_catalog." + code, msg);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::optional<std::string> dash_optional(const std::string& field) {
    if (field == "-" || field.empty()) return std::nullopt;
    return field;
}

} // namespace

Catalog Catalog::parse(const std::string& text) {
    Catalog cat;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool schema_seen = false;
    std::vector<std::pair<std::string, std::string>> pending_links;

    auto perr = [&](const std::string& msg) {
        fail("ParseError", "line " + std::to_string(lineno) + ": " + msg, ErrorKind::Parse);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto f = split_tabs(line);
        const auto& tag = f[0];
        if (tag == "schema") {
            if (f.size() != 2) perr("schema record takes one field");
            if (f[1] != std::to_string(kSchemaVersion)) perr("unsupported schema version '" + f[1] + "'");
            schema_seen = true;
        } else if (tag == "process") {
            if (f.size() != 7) perr("process record takes 6 fields");
            ScorProcess p;
            p.code = f[1];
            try {
                p.level = std::stoi(f[2]);
            } catch (...) {
                perr("bad level '" + f[2] + "'");
            }
            if (p.level < 1 || p.level > 4) perr("level must be 1..4");
            auto kind = parse_block_kind(f[3]);
            if (!kind) perr("unknown block kind '" + f[3] + "'");
            p.block_kind = *kind;
            if (auto ff = dash_optional(f[4])) {
                auto mode = parse_fulfillment(*ff);
                if (!mode) perr("unknown fulfillment '" + *ff + "'");
                p.fulfillment = *mode;
            }
            p.parent = dash_optional(f[5]);
            p.description = f[6];
            if (!cat.processes_.emplace(p.code, p).second) fail("DuplicateCode", "process '" + p.code + "'");
        } else if (tag == "practice") {
            if (f.size() != 3) perr("practice record takes 2 fields");
            if (!cat.practices_.emplace(f[1], Practice{f[1], f[2]}).second) {
                fail("DuplicateCode", "practice '" + f[1] + "'");
            }
        } else if (tag == "metric") {
            if (f.size() != 5) perr("metric record takes 4 fields");
            auto kind = parse_formula_kind(f[2]);
            if (!kind) perr("unknown formula kind '" + f[2] + "'");
            MetricDef m{f[1], f[4], *kind, f[3]};
            if (!cat.metrics_.emplace(m.code, m).second) fail("DuplicateCode", "metric '" + m.code + "'");
        } else if (tag == "link") {
            if (f.size() != 3) perr("link record takes 2 fields");
            pending_links.emplace_back(f[1], f[2]);
        } else {
            perr("unknown record type '" + tag + "'");
        }
    }
    if (!schema_seen && !(cat.processes_.empty() && cat.practices_.empty() && cat.metrics_.empty() &&
                          pending_links.empty())) {
        fail("ParseError", "missing schema record", ErrorKind::Parse);
    }

    for (const auto& [code, p] : cat.processes_) {
        if (p.level == 1) {
            if (p.parent) fail("LevelMismatch", "level-1 process '" + code + "' has a parent");
            continue;
        }
        if (!p.parent) fail("LevelMismatch", "level-" + std::to_string(p.level) + " process '" + code + "' has no parent");
        auto parent = cat.processes_.find(*p.parent);
        if (parent == cat.processes_.end()) {
            fail("DanglingReference", "process '" + code + "' names undeclared parent '" + *p.parent + "'");
        }
        if (parent->second.level != p.level - 1) {
            fail("LevelMismatch", "process '" + code + "' (level " + std::to_string(p.level) + ") under level " +
                                      std::to_string(parent->second.level));
        }
    }
    for (const auto& [code, m] : cat.metrics_) {
        if (!cat.processes_.count(m.scope)) {
            fail("DanglingReference", "metric '" + code + "' scoped to undeclared process '" + m.scope + "'");
        }
    }
    for (const auto& [proc, practice] : pending_links) {
        if (!cat.processes_.count(proc)) fail("DanglingReference", "link names undeclared process '" + proc + "'");
        if (!cat.practices_.count(practice)) {
            fail("DanglingReference", "link names undeclared practice '" + practice + "'");
        }
        auto& list = cat.links_[proc];
        if (std::find(list.begin(), list.end(), practice) != list.end()) {
            fail("DuplicateCode", "link " + proc + " -> " + practice + " repeated");
        }
        list.push_back(practice);
    }
    return cat;
}

Catalog Catalog::load_file(const std::string& path) {
    return parse(yaml::read_text_file(path, "scor_catalog"));
}

const ScorProcess* Catalog::find_process(std::string_view code) const {
    auto it = processes_.find(code);
    return it == processes_.end() ? nullptr : &it->second;
}

const MetricDef* Catalog::find_metric(std::string_view code) const {
    auto it = metrics_.find(code);
    return it == metrics_.end() ? nullptr : &it->second;
}

const ScorProcess& Catalog::lookup_process(std::string_view code) const {
    const auto* p = find_process(code);
    if (!p) fail("NotFound", "process '" + std::string(code) + "'");
    return *p;
}

std::vector<ScorProcess> Catalog::processes_for_block(BlockKind kind, Fulfillment mode) const {
    std::vector<ScorProcess> out;
    for (const auto& [code, p] : processes_) {
        if (p.level == 3 && p.block_kind == kind && (!p.fulfillment || *p.fulfillment == mode)) out.push_back(p);
    }
    return out;
}

std::vector<Practice> Catalog::practices_for_process(std::string_view code) const {
    lookup_process(code);
    std::vector<Practice> out;
    auto it = links_.find(code);
    if (it == links_.end()) return out;
    for (const auto& pc : it->second) out.push_back(practices_.at(pc));
    return out;
}

std::vector<MetricDef> Catalog::metrics_for_process(std::string_view code) const {
    lookup_process(code);
    std::vector<MetricDef> out;
    for (const auto& [mc, m] : metrics_) {
        if (m.scope == code) out.push_back(m);
    }
    return out;
}

std::string Catalog::serialize() const {
    std::ostringstream out;
    out << "# SCOR process catalog. Tab-separated records; see Catalog in scor_catalog.hpp for the schema.\n";
    out << "schema\t" << kSchemaVersion << '\n';
    for (const auto& [code, p] : processes_) {
        out << "process\t" << code << '\t' << p.level << '\t' << to_string(p.block_kind) << '\t'
            << (p.fulfillment ? std::string(to_string(*p.fulfillment)) : "-") << '\t' << p.parent.value_or("-") << '\t'
            << p.description << '\n';
    }
    for (const auto& [code, p] : practices_) out << "practice\t" << code << '\t' << p.name << '\n';
    for (const auto& [code, m] : metrics_) {
        out << "metric\t" << code << '\t' << to_string(m.formula_kind) << '\t' << m.scope << '\t' << m.name << '\n';
    }
    for (const auto& [proc, list] : links_) {
        for (const auto& pc : list) out << "link\t" << proc << '\t' << pc << '\n';
    }
    return out.str();
}

} // namespace scdt
