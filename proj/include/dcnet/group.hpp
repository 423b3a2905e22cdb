#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>

#include <gmpxx.h>

#include "dcnet/hash.hpp"

namespace dcnet {

using Rng = std::mt19937_64;

/// Element of Z_q. Arithmetic goes through the free functions below, which
/// take the group so the modulus is always explicit.
struct Scalar {
  mpz_class value;

  Scalar() = default;
  explicit Scalar(mpz_class v) : value(std::move(v)) {}
  explicit Scalar(long v) : value(v) {}

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value == b.value; }
};

/// Element of the order-q subgroup of Z_p^*.
struct Element {
  mpz_class value{1};

  Element() = default;
  explicit Element(mpz_class v) : value(std::move(v)) {}

  friend bool operator==(const Element& a, const Element& b) { return a.value == b.value; }
};

using Commitment = Element;

/// Schnorr group with two generators. `alpha` (log_g h) is only present in
/// the copies handed to the two correspondents.
struct GroupParams {
  mpz_class p;
  mpz_class q;
  mpz_class g;
  mpz_class h;
  std::optional<mpz_class> alpha;

  std::size_t scalar_bytes() const { return (mpz_sizeinbase(q.get_mpz_t(), 2) + 7) / 8; }
  std::size_t element_bytes() const { return (mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8; }
  std::size_t order_bits() const { return mpz_sizeinbase(q.get_mpz_t(), 2); }

  /// Copy with the trapdoor stripped.
  GroupParams public_part() const
  {
    GroupParams out = *this;
    out.alpha.reset();
    return out;
  }
};

/// p=23, q=11, g=2, h=8 (alpha=3).
GroupParams toy_group();

/// Fixed 256-bit safe prime p = 2q+1 with g = 4 and no second generator yet
/// (h is installed by `with_trapdoor`).
GroupParams base_group_256();

/// Search for a safe prime of `bits` bits starting from a seeded candidate;
/// returns p, q, g = 4 with h unset.
GroupParams generate_schnorr_group(unsigned bits, std::uint64_t seed);

/// Installs h = g^alpha and records alpha.
GroupParams with_trapdoor(GroupParams base, const Scalar& alpha);

/// Throws Errc::invalid_group unless the subgroup invariants hold.
void validate(const GroupParams& params);

bool in_subgroup(const GroupParams& params, const mpz_class& x);

// Scalar field arithmetic, all mod q.
Scalar reduce(const GroupParams& params, const mpz_class& x);
Scalar add(const GroupParams& params, const Scalar& a, const Scalar& b);
Scalar sub(const GroupParams& params, const Scalar& a, const Scalar& b);
Scalar mul(const GroupParams& params, const Scalar& a, const Scalar& b);
Scalar neg(const GroupParams& params, const Scalar& a);

/// Uniform in [0, q) by rejection sampling.
Scalar random_scalar(const GroupParams& params, Rng& rng);

/// c = g^r * h^k mod p.
Commitment commit(const GroupParams& params, const Scalar& k, const Scalar& r);

/// g^s * h^O == c.
bool verify_opening(const GroupParams& params, const Commitment& c, const Scalar& opening,
                    const Scalar& blinding);

struct Opening {
  Scalar value;
  Scalar blinding;
};

/// Opens commit(k, r) to k + m using the trapdoor: (k + m, r - m*alpha).
Opening equivocate(const GroupParams& params, const Scalar& k, const Scalar& r, const Scalar& m);

// Fixed-width big-endian encodings.
Bytes encode_scalar(const GroupParams& params, const Scalar& s);
Scalar decode_scalar(const GroupParams& params, std::span<const std::uint8_t> bytes);
Bytes encode_element(const GroupParams& params, const Element& e);
Element decode_element(const GroupParams& params, std::span<const std::uint8_t> bytes);

Bytes to_bytes(const mpz_class& x, std::size_t width);
mpz_class from_bytes(std::span<const std::uint8_t> bytes);

/// Key-value text: `p = ...`, `q = ...`, `g = ...`, `h = ...` and optionally
/// `alpha = ...`; values decimal or 0x-prefixed hex, `#` starts a comment.
GroupParams parse_group_text(const std::string& text);
std::string format_group_text(const GroupParams& params);
GroupParams read_group_file(const std::filesystem::path& path);
void write_group_file(const std::filesystem::path& path, const GroupParams& params);

std::string hex(const mpz_class& x);
mpz_class parse_integer(const std::string& text);

} // namespace dcnet
