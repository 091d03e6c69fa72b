#ifndef SCDT_BLOCK_KIND_HPP
#define SCDT_BLOCK_KIND_HPP

#include <array>
#include <optional>
#include <string_view>

namespace scdt {

/// The five standard blocks. No other kind is representable.
enum class BlockKind {
    B1_Obtain,
    B2_Make,
    B3_Distribute,
    B4_ReturnToUpstream,
    B5_ReturnFromDownstream,
};

inline constexpr std::array<BlockKind, 5> kAllBlockKinds{
    BlockKind::B1_Obtain,
    BlockKind::B2_Make,
    BlockKind::B3_Distribute,
    BlockKind::B4_ReturnToUpstream,
    BlockKind::B5_ReturnFromDownstream,
};

enum class Fulfillment { MTS, MTO, ETO, Retail };

/// "B1".."B5"
std::string_view to_string(BlockKind kind) noexcept;
std::string_view to_string(Fulfillment mode) noexcept;

/// Accepts "B1" or the long form "B1_Obtain".
std::optional<BlockKind> parse_block_kind(std::string_view text) noexcept;
std::optional<Fulfillment> parse_fulfillment(std::string_view text) noexcept;

} // namespace scdt

#endif // SCDT_BLOCK_KIND_HPP
