#include "dcnet/group.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "dcnet/error.hpp"

namespace dcnet {

namespace {

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod)
{
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class mod(const mpz_class& x, const mpz_class& m)
{
  mpz_class out;
  mpz_mod(out.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return out;
}

mpz_class random_bits(unsigned bits, Rng& rng)
{
  mpz_class out = 0;
  unsigned words = (bits + 63) / 64;
  for (unsigned i = 0; i < words; ++i) {
    out <<= 64;
    out += static_cast<unsigned long>(rng());
  }
  // drop the surplus low-order bits
  out >>= (words * 64 - bits);
  return out;
}

bool is_probable_prime(const mpz_class& x)
{
  return mpz_probab_prime_p(x.get_mpz_t(), 40) != 0;
}

std::string trim(const std::string& s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

GroupParams toy_group()
{
  GroupParams gp;
  gp.p = 23;
  gp.q = 11;
  gp.g = 2;
  gp.h = 8;
  gp.alpha = mpz_class(3);
  return gp;
}

GroupParams base_group_256()
{
  GroupParams gp;
  gp.p = mpz_class("f08b8dec7e9a70a9ac665abaffaa0ddb1aaf048dad85b01a6eb2aa2f4ec5eaa7", 16);
  gp.q = mpz_class("7845c6f63f4d3854d6332d5d7fd506ed8d578246d6c2d80d37595517a762f553", 16);
  gp.g = 4;
  gp.h = 0;
  return gp;
}

GroupParams generate_schnorr_group(unsigned bits, std::uint64_t seed)
{
  if (bits < 5)
    throw Error(Errc::invalid_group, "safe prime needs at least 5 bits");
  Rng rng(seed);
  const mpz_class q_top = mpz_class(1) << (bits - 2);
  const mpz_class q_limit = mpz_class(1) << (bits - 1);
  for (;;) {
    mpz_class q = random_bits(bits - 1, rng) | q_top;
    while (q < q_limit) {
      mpz_nextprime(q.get_mpz_t(), q.get_mpz_t());
      if (q >= q_limit) break;
      mpz_class p = 2 * q + 1;
      if (is_probable_prime(p)) {
        GroupParams gp;
        gp.p = p;
        gp.q = q;
        gp.g = 4;
        gp.h = 0;
        return gp;
      }
    }
  }
}

GroupParams with_trapdoor(GroupParams base, const Scalar& alpha)
{
  base.alpha = mod(alpha.value, base.q);
  base.h = powm(base.g, *base.alpha, base.p);
  return base;
}

bool in_subgroup(const GroupParams& params, const mpz_class& x)
{
  if (x <= 0 || x >= params.p) return false;
  return powm(x, params.q, params.p) == 1;
}

void validate(const GroupParams& params)
{
  if (params.p < 5 || !is_probable_prime(params.p))
    throw Error(Errc::invalid_group, "p is not prime");
  if (params.q < 2 || !is_probable_prime(params.q))
    throw Error(Errc::invalid_group, "q is not prime");
  if (mod(params.p - 1, params.q) != 0)
    throw Error(Errc::invalid_group, "q does not divide p-1");
  if (params.g == 1 || !in_subgroup(params, params.g))
    throw Error(Errc::invalid_group, "g does not generate the order-q subgroup");
  if (params.h == 1 || !in_subgroup(params, params.h))
    throw Error(Errc::invalid_group, "h does not generate the order-q subgroup");
  if (params.alpha && powm(params.g, *params.alpha, params.p) != params.h)
    throw Error(Errc::invalid_group, "h != g^alpha");
}

Scalar reduce(const GroupParams& params, const mpz_class& x) { return Scalar(mod(x, params.q)); }

Scalar add(const GroupParams& params, const Scalar& a, const Scalar& b)
{
  return reduce(params, a.value + b.value);
}

Scalar sub(const GroupParams& params, const Scalar& a, const Scalar& b)
{
  return reduce(params, a.value - b.value);
}

Scalar mul(const GroupParams& params, const Scalar& a, const Scalar& b)
{
  return reduce(params, a.value * b.value);
}

Scalar neg(const GroupParams& params, const Scalar& a) { return reduce(params, -a.value); }

Scalar random_scalar(const GroupParams& params, Rng& rng)
{
  const unsigned bits = static_cast<unsigned>(params.order_bits());
  for (;;) {
    mpz_class x = random_bits(bits, rng);
    if (x < params.q) return Scalar(std::move(x));
  }
}

Commitment commit(const GroupParams& params, const Scalar& k, const Scalar& r)
{
  mpz_class gr = powm(params.g, mod(r.value, params.q), params.p);
  mpz_class hk = powm(params.h, mod(k.value, params.q), params.p);
  return Commitment(mod(gr * hk, params.p));
}

bool verify_opening(const GroupParams& params, const Commitment& c, const Scalar& opening,
                    const Scalar& blinding)
{
  return commit(params, opening, blinding) == c;
}

Opening equivocate(const GroupParams& params, const Scalar& k, const Scalar& r, const Scalar& m)
{
  if (!params.alpha)
    throw Error(Errc::missing_trapdoor, "equivocation needs log_g h");
  Scalar alpha(*params.alpha);
  return {add(params, k, m), sub(params, r, mul(params, m, alpha))};
}

Bytes to_bytes(const mpz_class& x, std::size_t width)
{
  if (x < 0 || mpz_sizeinbase(x.get_mpz_t(), 256) > width)
    throw Error(Errc::out_of_range, "integer does not fit in " + std::to_string(width) + " octets");
  Bytes out(width, 0);
  if (x == 0) return out;
  std::size_t count = 0;
  Bytes tmp((mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8);
  mpz_export(tmp.data(), &count, 1, 1, 1, 0, x.get_mpz_t());
  std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(count),
            out.end() - static_cast<std::ptrdiff_t>(count));
  return out;
}

mpz_class from_bytes(std::span<const std::uint8_t> bytes)
{
  mpz_class out;
  if (bytes.empty()) return out;
  mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return out;
}

Bytes encode_scalar(const GroupParams& params, const Scalar& s)
{
  return to_bytes(s.value, params.scalar_bytes());
}

Scalar decode_scalar(const GroupParams& params, std::span<const std::uint8_t> bytes)
{
  if (bytes.size() != params.scalar_bytes())
    throw Error(Errc::decode_error, "scalar width mismatch");
  mpz_class v = from_bytes(bytes);
  if (v >= params.q)
    throw Error(Errc::decode_error, "scalar not reduced mod q");
  return Scalar(std::move(v));
}

Bytes encode_element(const GroupParams& params, const Element& e)
{
  return to_bytes(e.value, params.element_bytes());
}

Element decode_element(const GroupParams& params, std::span<const std::uint8_t> bytes)
{
  if (bytes.size() != params.element_bytes())
    throw Error(Errc::decode_error, "element width mismatch");
  mpz_class v = from_bytes(bytes);
  if (!in_subgroup(params, v))
    throw Error(Errc::decode_error, "element outside the order-q subgroup");
  return Element(std::move(v));
}

std::string hex(const mpz_class& x) { return "0x" + x.get_str(16); }

mpz_class parse_integer(const std::string& text)
{
  std::string t = trim(text);
  mpz_class out;
  int rc;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X'))
    rc = out.set_str(t.substr(2), 16);
  else
    rc = out.set_str(t, 10);
  if (rc != 0 || t.empty())
    throw Error(Errc::decode_error, "not an integer: '" + t + "'");
  return out;
}

GroupParams parse_group_text(const std::string& text)
{
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::decode_error, "expected key = value: '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  GroupParams gp;
  for (const char* key : {"p", "q", "g", "h"})
    if (!kv.count(key))
      throw Error(Errc::invalid_group, std::string("missing field ") + key);
  gp.p = parse_integer(kv["p"]);
  gp.q = parse_integer(kv["q"]);
  gp.g = parse_integer(kv["g"]);
  gp.h = parse_integer(kv["h"]);
  if (kv.count("alpha")) gp.alpha = parse_integer(kv["alpha"]);
  validate(gp);
  return gp;
}

std::string format_group_text(const GroupParams& params)
{
  std::ostringstream out;
  out << "p = " << hex(params.p) << "\n";
  out << "q = " << hex(params.q) << "\n";
  out << "g = " << hex(params.g) << "\n";
  out << "h = " << hex(params.h) << "\n";
  if (params.alpha) out << "alpha = " << hex(*params.alpha) << "\n";
  return out.str();
}

GroupParams read_group_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_group_text(buf.str());
}

void write_group_file(const std::filesystem::path& path, const GroupParams& params)
{
  std::ofstream out(path);
  if (!out)
    throw Error(Errc::io_error, "cannot write " + path.string());
  out << format_group_text(params);
}

} // namespace dcnet
