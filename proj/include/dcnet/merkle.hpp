#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcnet/hash.hpp"

namespace dcnet {

enum class Side : std::uint8_t { left = 0, right = 1 };

struct Sibling {
  Digest digest{};
  Side side = Side::left; // where the sibling sits relative to the running hash

  friend bool operator==(const Sibling&, const Sibling&) = default;
};

/// Inclusion proof for the leaf at 1-based `position`.
struct PositionProof {
  std::uint32_t position = 0;
  std::vector<Sibling> siblings; // bottom-up

  friend bool operator==(const PositionProof&, const PositionProof&) = default;
};

Digest hash_leaf(std::span<const std::uint8_t> leaf);
Digest hash_interior(const Digest& left, const Digest& right);

/// Binary hash tree over encoded leaves. Leaf count is padded up to a power
/// of two with `filler`; leaves are hashed as H(0x00 || leaf) and interior
/// nodes as H(0x01 || left || right).
class MerkleSchedule {
public:
  MerkleSchedule() = default;
  MerkleSchedule(const std::vector<Bytes>& leaves, const Bytes& filler);

  const Digest& root() const { return m_levels.back().front(); }
  std::size_t leaf_count() const { return m_levels.front().size(); }
  std::size_t height() const { return m_levels.size() - 1; }

  /// Throws Errc::out_of_range unless 1 <= j <= leaf_count().
  PositionProof prove(std::uint32_t j) const;

private:
  std::vector<std::vector<Digest>> m_levels; // m_levels[0] = leaf digests
};

MerkleSchedule build_tree(const std::vector<Bytes>& leaves, const Bytes& filler = {});

PositionProof prove_position(const MerkleSchedule& tree, std::uint32_t j);

/// Folds the leaf up the path and checks both the root and that the side
/// sequence spells out j-1 in binary (least significant bit first).
bool verify_position(const Digest& root, std::span<const std::uint8_t> leaf, std::uint32_t j,
                     const PositionProof& proof);

} // namespace dcnet
