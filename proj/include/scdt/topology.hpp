#ifndef SCDT_TOPOLOGY_HPP
#define SCDT_TOPOLOGY_HPP

#include "scdt/block_kind.hpp"
#include "scdt/core.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace scdt {

class Catalog;

enum class Role { Supplier, Manufacturer, Transport, Retailer, Customer };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

struct MemberRole {
    Role tag = Role::Supplier;
    bool self_transport = false; ///< always true for Role::Transport

    bool operator==(const MemberRole&) const = default;
};

/// A process-set. `processes` run in the listed order; `core` names the step
/// that carries the block's capacity, transit or wait time (defaults to the first).
struct Block {
    std::string id;
    BlockKind kind = BlockKind::B1_Obtain;
    Fulfillment fulfillment = Fulfillment::MTS;
    std::vector<std::string> processes;
    std::optional<std::string> core;

    std::size_t core_index() const;
    bool operator==(const Block&) const = default;
};

struct ModuleNode {
    std::string id;
    std::string label;
    std::vector<Block> blocks;

    const Block* find_block(BlockKind kind) const;
    bool operator==(const ModuleNode&) const = default;
};

struct Member {
    std::string id;
    MemberRole role;
    std::vector<ModuleNode> modules;

    const ModuleNode* find_module(std::string_view module_id) const;
    /// First module (canonical order) holding a block of this kind.
    const ModuleNode* module_with(BlockKind kind) const;
    bool operator==(const Member&) const = default;
};

struct EndpointRef {
    std::string member;
    std::string module;

    auto operator<=>(const EndpointRef&) const = default;
    std::string str() const { return member + "/" + module; }
};

enum class FlowKind { Material, Information, Finance };

std::string_view to_string(FlowKind kind) noexcept;

struct FlowLink {
    EndpointRef from;
    EndpointRef to;
    FlowKind flow = FlowKind::Material;
    std::optional<std::string> carrier;

    bool operator==(const FlowLink&) const = default;
};

using RoleBlockTable = std::map<Role, std::set<BlockKind>>;

/// Supplier {B2,B3,B5}, Manufacturer {B1..B5}, Transport {B1,B3},
/// Retailer {B1,B3,B4,B5}, Customer {B1,B4}.
RoleBlockTable default_role_block_table();

struct SupplyChainSystem {
    std::vector<Member> members;
    std::vector<FlowLink> flows;
    std::string goal;
    RoleBlockTable allowed_blocks = default_role_block_table();

    const Member* find_member(std::string_view id) const;
    const ModuleNode* find_module(const EndpointRef& ref) const;
    /// Declared carrier, else a self-transporting endpoint (source first).
    std::optional<std::string> effective_carrier(const FlowLink& link) const;
    std::size_t module_count() const;
};

/// Parses the YAML topology document and resolves every reference.
/// Errors: topology.ParseError, topology.NoMembers, topology.DuplicateId,
/// topology.UnknownReference, topology.EmptyMember, topology.EmptyModule,
/// topology.DuplicateBlockKind.
SupplyChainSystem build_topology(const std::string& document);
SupplyChainSystem build_topology(const YAML::Node& root);
SupplyChainSystem load_topology_file(const std::string& path);

enum class Severity { Info, Error };

struct Violation {
    std::string rule;     ///< e.g. "TRANSPORT_REQUIRED"
    std::string location; ///< e.g. "flow supplier2/main->retailer1/main"
    Severity severity = Severity::Error;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    /// No Error-severity entries. Informational DISCONNECTED entries do not invalidate.
    bool valid() const;
    bool has(std::string_view rule) const;
    std::string render() const;
};

/// Never throws for a built system. Passing a catalog enables the process rules.
ValidationReport validate_topology(const SupplyChainSystem& system, const Catalog* catalog = nullptr);

struct MemberSpec {
    std::string id;
    Role role = Role::Supplier;
    bool self_transport = false;
    Fulfillment fulfillment = Fulfillment::MTS;
    /// obtain, make, distribute, returns, return-out, return-in, store-raw, store-finished
    std::set<std::string> functions;
};

/// Builds the module/block layout implied by a member's business functions.
/// Storage functions select the three-module warehouse / shop floor / warehouse layout.
/// Errors: topology.UnknownFunction.
Member decompose_member(const MemberSpec& spec);

/// Inverse view of decompose_member, used to check idempotence.
MemberSpec member_spec_of(const Member& member);

/// Canonical plain-text dump: one entity per line, two spaces per level,
/// lexicographic by id at every level, flows last.
std::string block_structure(const SupplyChainSystem& system);

} // namespace scdt

#endif // SCDT_TOPOLOGY_HPP
