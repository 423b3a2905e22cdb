#include "dcnet/merkle.hpp"

#include <cstring>

#include "dcnet/error.hpp"

namespace dcnet {

Digest hash_leaf(std::span<const std::uint8_t> leaf)
{
  Bytes buf;
  buf.reserve(leaf.size() + 1);
  buf.push_back(0x00);
  buf.insert(buf.end(), leaf.begin(), leaf.end());
  return sha256(buf);
}

Digest hash_interior(const Digest& left, const Digest& right)
{
  std::array<std::uint8_t, 65> buf{};
  buf[0] = 0x01;
  std::memcpy(buf.data() + 1, left.data(), 32);
  std::memcpy(buf.data() + 33, right.data(), 32);
  return sha256(buf);
}

MerkleSchedule::MerkleSchedule(const std::vector<Bytes>& leaves, const Bytes& filler)
{
  if (leaves.empty())
    throw Error(Errc::out_of_range, "Merkle tree needs at least one leaf");
  std::size_t width = 1;
  while (width < leaves.size()) width <<= 1;

  std::vector<Digest> level;
  level.reserve(width);
  for (const auto& leaf : leaves) level.push_back(hash_leaf(leaf));
  if (width > leaves.size()) {
    Digest pad = hash_leaf(filler);
    level.resize(width, pad);
  }
  m_levels.push_back(std::move(level));
  while (m_levels.back().size() > 1) {
    const auto& below = m_levels.back();
    std::vector<Digest> above(below.size() / 2);
    for (std::size_t i = 0; i < above.size(); ++i)
      above[i] = hash_interior(below[2 * i], below[2 * i + 1]);
    m_levels.push_back(std::move(above));
  }
}

PositionProof MerkleSchedule::prove(std::uint32_t j) const
{
  if (j < 1 || j > leaf_count())
    throw Error(Errc::out_of_range, "position " + std::to_string(j) + " outside tree of "
                                        + std::to_string(leaf_count()) + " leaves");
  PositionProof proof;
  proof.position = j;
  std::size_t idx = j - 1;
  for (std::size_t lvl = 0; lvl + 1 < m_levels.size(); ++lvl) {
    bool is_right = idx & 1;
    proof.siblings.push_back({m_levels[lvl][idx ^ 1], is_right ? Side::left : Side::right});
    idx >>= 1;
  }
  return proof;
}

MerkleSchedule build_tree(const std::vector<Bytes>& leaves, const Bytes& filler)
{
  return MerkleSchedule(leaves, filler);
}

PositionProof prove_position(const MerkleSchedule& tree, std::uint32_t j) { return tree.prove(j); }

bool verify_position(const Digest& root, std::span<const std::uint8_t> leaf, std::uint32_t j,
                     const PositionProof& proof)
{
  if (j < 1 || proof.position != j) return false;
  const std::size_t height = proof.siblings.size();
  if (height < 32 && (std::uint64_t{j} - 1) >> height != 0) return false;

  std::uint64_t idx = j - 1;
  Digest running = hash_leaf(leaf);
  for (const auto& sib : proof.siblings) {
    Side expected = (idx & 1) ? Side::left : Side::right;
    if (sib.side != expected) return false;
    running = sib.side == Side::left ? hash_interior(sib.digest, running)
                                     : hash_interior(running, sib.digest);
    idx >>= 1;
  }
  return running == root;
}

} // namespace dcnet
