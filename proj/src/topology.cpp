#include "scdt/topology.hpp"

#include "scdt/scor_catalog.hpp"
#include "yaml_util.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace scdt {

std::string_view to_string(BlockKind kind) noexcept {
    switch (kind) {
    case BlockKind::B1_Obtain: return "B1";
    case BlockKind::B2_Make: return "B2";
    case BlockKind::B3_Distribute: return "B3";
    case BlockKind::B4_ReturnToUpstream: return "B4";
    case BlockKind::B5_ReturnFromDownstream: return "B5";
    }
    return "B?";
}

std::string_view to_string(Fulfillment mode) noexcept {
    switch (mode) {
    case Fulfillment::MTS: return "MTS";
    case Fulfillment::MTO: return "MTO";
    case Fulfillment::ETO: return "ETO";
    case Fulfillment::Retail: return "Retail";
    }
    return "?";
}

std::optional<BlockKind> parse_block_kind(std::string_view text) noexcept {
    static constexpr std::array<std::string_view, 5> long_names{
        "B1_Obtain", "B2_Make", "B3_Distribute", "B4_ReturnToUpstream", "B5_ReturnFromDownstream"};
    for (std::size_t i = 0; i < kAllBlockKinds.size(); ++i) {
        if (text == to_string(kAllBlockKinds[i]) || text == long_names[i]) return kAllBlockKinds[i];
    }
    return std::nullopt;
}

std::optional<Fulfillment> parse_fulfillment(std::string_view text) noexcept {
    for (auto f : {Fulfillment::MTS, Fulfillment::MTO, Fulfillment::ETO, Fulfillment::Retail}) {
        if (text == to_string(f)) return f;
    }
    return std::nullopt;
}

std::string_view to_string(Role role) noexcept {
    switch (role) {
    case Role::Supplier: return "Supplier";
    case Role::Manufacturer: return "Manufacturer";
    case Role::Transport: return "Transport";
    case Role::Retailer: return "Retailer";
    case Role::Customer: return "Customer";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
    for (auto r : {Role::Supplier, Role::Manufacturer, Role::Transport, Role::Retailer, Role::Customer}) {
        if (text == to_string(r)) return r;
    }
    return std::nullopt;
}

std::string_view to_string(FlowKind kind) noexcept {
    switch (kind) {
    case FlowKind::Material: return "Material";
    case FlowKind::Information: return "Information";
    case FlowKind::Finance: return "Finance";
    }
    return "?";
}

RoleBlockTable default_role_block_table() {
    using enum BlockKind;
    return {
        {Role::Supplier, {B2_Make, B3_Distribute, B5_ReturnFromDownstream}},
        {Role::Manufacturer, {B1_Obtain, B2_Make, B3_Distribute, B4_ReturnToUpstream, B5_ReturnFromDownstream}},
        {Role::Transport, {B1_Obtain, B3_Distribute}},
        {Role::Retailer, {B1_Obtain, B3_Distribute, B4_ReturnToUpstream, B5_ReturnFromDownstream}},
        {Role::Customer, {B1_Obtain, B4_ReturnToUpstream}},
    };
}

std::size_t Block::core_index() const {
    if (core) {
        auto it = std::find(processes.begin(), processes.end(), *core);
        if (it != processes.end()) return static_cast<std::size_t>(it - processes.begin());
    }
    return 0;
}

const Block* ModuleNode::find_block(BlockKind kind) const {
    for (const auto& b : blocks) {
        if (b.kind == kind) return &b;
    }
    return nullptr;
}

const ModuleNode* Member::find_module(std::string_view module_id) const {
    for (const auto& m : modules) {
        if (m.id == module_id) return &m;
    }
    return nullptr;
}

const ModuleNode* Member::module_with(BlockKind kind) const {
    for (const auto& m : modules) {
        if (m.find_block(kind)) return &m;
    }
    return nullptr;
}

const Member* SupplyChainSystem::find_member(std::string_view id) const {
    for (const auto& m : members) {
        if (m.id == id) return &m;
    }
    return nullptr;
}

const ModuleNode* SupplyChainSystem::find_module(const EndpointRef& ref) const {
    const auto* member = find_member(ref.member);
    return member ? member->find_module(ref.module) : nullptr;
}

std::optional<std::string> SupplyChainSystem::effective_carrier(const FlowLink& link) const {
    if (link.carrier) return link.carrier;
    for (const auto* id : {&link.from.member, &link.to.member}) {
        const auto* m = find_member(*id);
        if (m && m->role.self_transport) return *id;
    }
    return std::nullopt;
}

std::size_t SupplyChainSystem::module_count() const {
    return std::accumulate(members.begin(), members.end(), std::size_t{0},
                           [](std::size_t n, const Member& m) { return n + m.modules.size(); });
}

// ---------------------------------------------------------------------------
// build_topology

namespace {

[[noreturn]] void fail(std::string code, const std::string& msg, ErrorKind kind = ErrorKind::Domain) {
    throw Error(kind, "topology." + code, msg);
}

[[noreturn]] void parse_fail(const std::string& msg) { fail("ParseError", msg, ErrorKind::Parse); }

EndpointRef parse_endpoint(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
        parse_fail("endpoint must be 'member/module': '" + text + "'");
    }
    return {text.substr(0, slash), text.substr(slash + 1)};
}

Block parse_block(const YAML::Node& node) {
    Block block;
    block.id = yaml::required_string(node, "id", "topology");
    const auto kind_text = yaml::required_string(node, "kind", "topology");
    auto kind = parse_block_kind(kind_text);
    if (!kind) parse_fail("unknown block kind '" + kind_text + "'");
    block.kind = *kind;
    if (auto f = yaml::optional_string(node, "fulfillment", "topology")) {
        auto mode = parse_fulfillment(*f);
        if (!mode) parse_fail("unknown fulfillment '" + *f + "'");
        block.fulfillment = *mode;
    }
    block.processes = yaml::string_list(node, "processes", "topology");
    block.core = yaml::optional_string(node, "core", "topology");
    return block;
}

void sort_member(Member& member) {
    for (auto& mod : member.modules) {
        std::sort(mod.blocks.begin(), mod.blocks.end(), [](const Block& a, const Block& b) { return a.id < b.id; });
    }
    std::sort(member.modules.begin(), member.modules.end(),
              [](const ModuleNode& a, const ModuleNode& b) { return a.id < b.id; });
}

void check_member_structure(const Member& member) {
    if (member.modules.empty()) fail("EmptyMember", "member '" + member.id + "' has no modules");
    std::set<std::string> module_ids;
    for (const auto& mod : member.modules) {
        if (!module_ids.insert(mod.id).second) {
            fail("DuplicateId", "module id '" + mod.id + "' repeated in member '" + member.id + "'");
        }
        if (mod.blocks.empty()) fail("EmptyModule", "module '" + member.id + "/" + mod.id + "' has no blocks");
        std::set<std::string> block_ids;
        std::set<BlockKind> kinds;
        for (const auto& b : mod.blocks) {
            if (!block_ids.insert(b.id).second) {
                fail("DuplicateId", "block id '" + b.id + "' repeated in module '" + member.id + "/" + mod.id + "'");
            }
            if (!kinds.insert(b.kind).second) {
                fail("DuplicateBlockKind", "block kind " + std::string(to_string(b.kind)) + " repeated in module '" +
                                               member.id + "/" + mod.id + "'");
            }
        }
    }
}

} // namespace

SupplyChainSystem build_topology(const YAML::Node& root) {
    if (!root.IsMap()) parse_fail("topology document must be a mapping");
    SupplyChainSystem system;
    system.goal = yaml::optional_string(root, "goal", "topology").value_or("");

    if (auto table = root["allowed_blocks"]) {
        if (!table.IsMap()) parse_fail("allowed_blocks must be a mapping");
        for (const auto& entry : table) {
            const auto role_text = entry.first.as<std::string>();
            auto role = parse_role(role_text);
            if (!role) parse_fail("unknown role '" + role_text + "' in allowed_blocks");
            std::set<BlockKind> kinds;
            if (!entry.second.IsSequence()) parse_fail("allowed_blocks entries must be lists");
            for (const auto& k : entry.second) {
                auto kind = parse_block_kind(k.as<std::string>());
                if (!kind) parse_fail("unknown block kind in allowed_blocks");
                kinds.insert(*kind);
            }
            system.allowed_blocks[*role] = std::move(kinds);
        }
    }

    auto members = root["members"];
    if (members && !members.IsSequence()) parse_fail("members must be a list");
    if (!members || members.size() == 0) fail("NoMembers", "topology declares no members");

    std::set<std::string> member_ids;
    for (const auto& mnode : members) {
        Member member;
        member.id = yaml::required_string(mnode, "id", "topology");
        const auto role_text = yaml::required_string(mnode, "role", "topology");
        auto role = parse_role(role_text);
        if (!role) parse_fail("unknown role '" + role_text + "'");
        member.role.tag = *role;
        member.role.self_transport = yaml::optional_bool(mnode, "self_transport", "topology").value_or(false) ||
                                     *role == Role::Transport;
        if (auto modules = mnode["modules"]) {
            if (!modules.IsSequence()) parse_fail("modules must be a list");
            for (const auto& modnode : modules) {
                ModuleNode mod;
                mod.id = yaml::required_string(modnode, "id", "topology");
                mod.label = yaml::optional_string(modnode, "label", "topology").value_or("");
                if (auto blocks = modnode["blocks"]) {
                    if (!blocks.IsSequence()) parse_fail("blocks must be a list");
                    for (const auto& bnode : blocks) mod.blocks.push_back(parse_block(bnode));
                }
                member.modules.push_back(std::move(mod));
            }
        }
        if (!member_ids.insert(member.id).second) fail("DuplicateId", "member id '" + member.id + "' repeated");
        check_member_structure(member);
        sort_member(member);
        system.members.push_back(std::move(member));
    }
    std::sort(system.members.begin(), system.members.end(),
              [](const Member& a, const Member& b) { return a.id < b.id; });

    if (auto flows = root["flows"]) {
        if (!flows.IsSequence()) parse_fail("flows must be a list");
        for (const auto& fnode : flows) {
            FlowLink link;
            link.from = parse_endpoint(yaml::required_string(fnode, "from", "topology"));
            link.to = parse_endpoint(yaml::required_string(fnode, "to", "topology"));
            const auto kind = yaml::optional_string(fnode, "flow", "topology").value_or("Material");
            if (kind == "Material") link.flow = FlowKind::Material;
            else if (kind == "Information") link.flow = FlowKind::Information;
            else if (kind == "Finance") link.flow = FlowKind::Finance;
            else parse_fail("unknown flow kind '" + kind + "'");
            link.carrier = yaml::optional_string(fnode, "carrier", "topology");
            for (const auto* ep : {&link.from, &link.to}) {
                if (!system.find_member(ep->member)) {
                    fail("UnknownReference", "flow references undeclared member '" + ep->member + "'");
                }
                if (!system.find_module(*ep)) {
                    fail("UnknownReference", "flow references undeclared module '" + ep->str() + "'");
                }
            }
            if (link.carrier && !system.find_member(*link.carrier)) {
                fail("UnknownReference", "flow carrier '" + *link.carrier + "' is not a declared member");
            }
            system.flows.push_back(std::move(link));
        }
    }
    std::sort(system.flows.begin(), system.flows.end(), [](const FlowLink& a, const FlowLink& b) {
        return std::tie(a.from, a.to, a.flow, a.carrier) < std::tie(b.from, b.to, b.flow, b.carrier);
    });
    return system;
}

SupplyChainSystem build_topology(const std::string& document) {
    return build_topology(yaml::parse_document(document, "topology"));
}

SupplyChainSystem load_topology_file(const std::string& path) {
    return build_topology(yaml::read_text_file(path, "topology"));
}

// ---------------------------------------------------------------------------
// validate_topology

bool ValidationReport::valid() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return v.severity == Severity::Error; });
}

bool ValidationReport::has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::render() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << (v.severity == Severity::Error ? "error" : "info") << '\t' << v.rule << '\t' << v.location << '\t'
            << v.detail << '\n';
    }
    return out.str();
}

namespace {

std::string flow_location(const FlowLink& link) {
    return "flow " + link.from.str() + "->" + link.to.str();
}

bool transport_capable(const SupplyChainSystem& system, const FlowLink& link, const std::string& carrier) {
    const auto* m = system.find_member(carrier);
    if (!m) return false;
    if (m->role.tag == Role::Transport) return true;
    const bool is_endpoint = carrier == link.from.member || carrier == link.to.member;
    return is_endpoint && m->role.self_transport;
}

} // namespace

ValidationReport validate_topology(const SupplyChainSystem& system, const Catalog* catalog) {
    ValidationReport report;
    auto add = [&](std::string rule, std::string location, std::string detail, Severity sev = Severity::Error) {
        report.violations.push_back({std::move(rule), std::move(location), sev, std::move(detail)});
    };

    for (const auto& member : system.members) {
        auto allowed_it = system.allowed_blocks.find(member.role.tag);
        for (const auto& mod : member.modules) {
            for (const auto& block : mod.blocks) {
                const auto where = member.id + "/" + mod.id + "/" + block.id;
                if (allowed_it == system.allowed_blocks.end() || !allowed_it->second.count(block.kind)) {
                    add("BLOCK_ROLE_MISMATCH", where,
                        std::string(to_string(block.kind)) + " not allowed for role " +
                            std::string(to_string(member.role.tag)));
                }
                if (block.core && std::find(block.processes.begin(), block.processes.end(), *block.core) ==
                                      block.processes.end()) {
                    add("CORE_NOT_ATTACHED", where, "core process '" + *block.core + "' is not in the process list");
                }
                if (catalog) {
                    for (const auto& code : block.processes) {
                        const auto* proc = catalog->find_process(code);
                        if (!proc) {
                            add("UNKNOWN_PROCESS", where, "process '" + code + "' not in catalog");
                        } else if (proc->block_kind != block.kind) {
                            add("PROCESS_BLOCK_MISMATCH", where,
                                "process '" + code + "' belongs to " + std::string(to_string(proc->block_kind)));
                        }
                    }
                }
            }
        }
    }

    for (const auto& link : system.flows) {
        if (link.from == link.to) add("SELF_LOOP", flow_location(link), "flow starts and ends at the same module");
        if (link.flow != FlowKind::Material) continue;
        if (link.carrier) {
            if (!transport_capable(system, link, *link.carrier)) {
                add("CARRIER_INCAPABLE", flow_location(link),
                    "carrier '" + *link.carrier + "' is neither a transport member nor a self-transporting endpoint");
            }
        } else if (!system.effective_carrier(link)) {
            add("TRANSPORT_REQUIRED", flow_location(link),
                "material flow has no carrier and neither endpoint provides its own transport");
        }
    }

    // Weak connectivity of the material graph over non-transport members.
    std::vector<std::string> nodes;
    for (const auto& m : system.members) {
        if (m.role.tag != Role::Transport) nodes.push_back(m.id);
    }
    if (system.flows.empty()) {
        if (nodes.size() > 1) add("DISCONNECTED", "system", "no flows declared", Severity::Info);
    } else if (nodes.size() > 1) {
        std::map<std::string, std::string> parent;
        for (const auto& n : nodes) parent[n] = n;
        std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
            auto& p = parent[x];
            if (p == x) return x;
            p = find(p);
            return p;
        };
        for (const auto& link : system.flows) {
            if (link.flow != FlowKind::Material) continue;
            if (!parent.count(link.from.member) || !parent.count(link.to.member)) continue;
            parent[find(link.from.member)] = find(link.to.member);
        }
        std::set<std::string> roots;
        for (const auto& n : nodes) roots.insert(find(n));
        if (roots.size() > 1) {
            add("DISCONNECTED", "system",
                "material flows form " + std::to_string(roots.size()) + " components over non-transport members");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// decompose_member

namespace {

const std::set<std::string>& known_functions() {
    static const std::set<std::string> names{"obtain",    "make",      "distribute", "returns",
                                             "return-out", "return-in", "store-raw",  "store-finished"};
    return names;
}

std::string_view block_id_for(BlockKind kind) {
    switch (kind) {
    case BlockKind::B1_Obtain: return "obtain";
    case BlockKind::B2_Make: return "make";
    case BlockKind::B3_Distribute: return "distribute";
    case BlockKind::B4_ReturnToUpstream: return "return-upstream";
    case BlockKind::B5_ReturnFromDownstream: return "return-downstream";
    }
    return "block";
}

} // namespace

Member decompose_member(const MemberSpec& spec) {
    if (spec.functions.empty()) fail("UnknownFunction", "(empty)");
    for (const auto& f : spec.functions) {
        if (!known_functions().count(f)) fail("UnknownFunction", f);
    }
    auto has = [&](std::string_view f) { return spec.functions.count(std::string(f)) > 0; };

    std::set<BlockKind> kinds;
    if (has("obtain")) kinds.insert(BlockKind::B1_Obtain);
    if (has("make")) kinds.insert(BlockKind::B2_Make);
    if (has("distribute")) kinds.insert(BlockKind::B3_Distribute);
    if (has("returns") || has("return-out")) kinds.insert(BlockKind::B4_ReturnToUpstream);
    if (has("returns") || has("return-in")) kinds.insert(BlockKind::B5_ReturnFromDownstream);
    if (kinds.empty()) fail("UnknownFunction", "no block-producing function among the declared functions");

    Member member;
    member.id = spec.id;
    member.role = {spec.role, spec.self_transport || spec.role == Role::Transport};

    auto make_block = [&](BlockKind kind) {
        Block b;
        b.id = std::string(block_id_for(kind));
        b.kind = kind;
        b.fulfillment = spec.fulfillment;
        return b;
    };

    const bool layered = has("store-raw") || has("store-finished");
    if (!layered) {
        ModuleNode mod{"main", "site", {}};
        for (auto k : kinds) mod.blocks.push_back(make_block(k));
        member.modules.push_back(std::move(mod));
    } else {
        ModuleNode raw{"raw-warehouse", "raw material warehouse", {}};
        ModuleNode floor{"shop-floor", "shop floor", {}};
        ModuleNode finished{"finished-warehouse", "finished product warehouse", {}};
        for (auto k : kinds) {
            switch (k) {
            case BlockKind::B1_Obtain:
            case BlockKind::B4_ReturnToUpstream: raw.blocks.push_back(make_block(k)); break;
            case BlockKind::B2_Make: floor.blocks.push_back(make_block(k)); break;
            case BlockKind::B3_Distribute:
            case BlockKind::B5_ReturnFromDownstream: finished.blocks.push_back(make_block(k)); break;
            }
        }
        for (auto* mod : {&finished, &raw, &floor}) {
            if (!mod->blocks.empty()) member.modules.push_back(std::move(*mod));
        }
    }
    sort_member(member);
    return member;
}

MemberSpec member_spec_of(const Member& member) {
    MemberSpec spec;
    spec.id = member.id;
    spec.role = member.role.tag;
    spec.self_transport = member.role.self_transport;
    bool layered = false;
    bool first = true;
    for (const auto& mod : member.modules) {
        if (mod.id != "main") layered = true;
        for (const auto& b : mod.blocks) {
            if (first) {
                spec.fulfillment = b.fulfillment;
                first = false;
            }
            switch (b.kind) {
            case BlockKind::B1_Obtain: spec.functions.insert("obtain"); break;
            case BlockKind::B2_Make: spec.functions.insert("make"); break;
            case BlockKind::B3_Distribute: spec.functions.insert("distribute"); break;
            case BlockKind::B4_ReturnToUpstream: spec.functions.insert("return-out"); break;
            case BlockKind::B5_ReturnFromDownstream: spec.functions.insert("return-in"); break;
            }
        }
    }
    if (layered) {
        spec.functions.insert("store-raw");
        spec.functions.insert("store-finished");
    }
    return spec;
}

// ---------------------------------------------------------------------------
// block_structure

namespace {

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string block_structure(const SupplyChainSystem& system) {
    std::vector<const Member*> members;
    for (const auto& m : system.members) members.push_back(&m);
    std::sort(members.begin(), members.end(), [](const Member* a, const Member* b) { return a->id < b->id; });

    std::ostringstream out;
    for (const auto* member : members) {
        out << "member " << member->id << " role=" << to_string(member->role.tag)
            << " self_transport=" << (member->role.self_transport ? "true" : "false") << '\n';
        std::vector<const ModuleNode*> modules;
        for (const auto& mod : member->modules) modules.push_back(&mod);
        std::sort(modules.begin(), modules.end(), [](const ModuleNode* a, const ModuleNode* b) { return a->id < b->id; });
        for (const auto* mod : modules) {
            out << "  module " << mod->id << " label=" << quote(mod->label) << '\n';
            std::vector<const Block*> blocks;
            for (const auto& b : mod->blocks) blocks.push_back(&b);
            std::sort(blocks.begin(), blocks.end(), [](const Block* a, const Block* b) { return a->id < b->id; });
            for (const auto* b : blocks) {
                out << "    block " << b->id << " kind=" << to_string(b->kind)
                    << " fulfillment=" << to_string(b->fulfillment) << " processes=";
                for (std::size_t i = 0; i < b->processes.size(); ++i) out << (i ? "," : "") << b->processes[i];
                if (b->core) out << " core=" << *b->core;
                out << '\n';
            }
        }
    }
    std::vector<const FlowLink*> flows;
    for (const auto& f : system.flows) flows.push_back(&f);
    std::sort(flows.begin(), flows.end(), [](const FlowLink* a, const FlowLink* b) {
        return std::tie(a->from, a->to, a->flow, a->carrier) < std::tie(b->from, b->to, b->flow, b->carrier);
    });
    for (const auto* f : flows) {
        out << "flow " << to_string(f->flow) << ' ' << f->from.str() << " -> " << f->to.str();
        if (f->carrier) out << " carrier=" << *f->carrier;
        out << '\n';
    }
    return out.str();
}

} // namespace scdt
