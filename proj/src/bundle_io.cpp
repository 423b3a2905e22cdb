#include "dcnet/bundle_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dcnet/error.hpp"

namespace dcnet {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string hex_of(const mpz_class& x) { return x.get_str(16); }

mpz_class mpz_of(const ordered_json& j)
{
  mpz_class x;
  if (!j.is_string() || x.set_str(j.get<std::string>(), 16) != 0)
    throw Error(Errc::decode_error, "expected a hex integer");
  return x;
}

ordered_json group_json(const GroupParams& gp, bool with_alpha)
{
  ordered_json j{{"p", hex_of(gp.p)}, {"q", hex_of(gp.q)}, {"g", hex_of(gp.g)}, {"h", hex_of(gp.h)}};
  if (with_alpha && gp.alpha) j["alpha"] = hex_of(*gp.alpha);
  return j;
}

GroupParams group_of(const ordered_json& j)
{
  GroupParams gp;
  gp.p = mpz_of(j.at("p"));
  gp.q = mpz_of(j.at("q"));
  gp.g = mpz_of(j.at("g"));
  gp.h = mpz_of(j.at("h"));
  if (j.contains("alpha")) gp.alpha = mpz_of(j.at("alpha"));
  validate(gp);
  return gp;
}

ordered_json scalars_json(const std::vector<Scalar>& xs)
{
  auto arr = ordered_json::array();
  for (const auto& x : xs) arr.push_back(hex_of(x.value));
  return arr;
}

std::vector<Scalar> scalars_of(const GroupParams& gp, const ordered_json& j)
{
  std::vector<Scalar> out;
  for (const auto& x : j) {
    Scalar s(mpz_of(x));
    if (s.value < 0 || s.value >= gp.q) throw Error(Errc::decode_error, "scalar out of range");
    out.push_back(std::move(s));
  }
  return out;
}

Seed seed_of(const ordered_json& j)
{
  Bytes b = from_hex(j.get<std::string>());
  if (b.size() != 32) throw Error(Errc::decode_error, "seed must be 32 octets");
  Seed s;
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

ordered_json parse_checked(const std::string& text, const char* format)
{
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  }
  catch (const nlohmann::json::exception& e) {
    throw Error(Errc::decode_error, e.what());
  }
  if (!j.is_object() || j.value("format", "") != format)
    throw Error(Errc::decode_error, std::string("expected a ") + format + " document");
  return j;
}

template <typename F>
auto guarded(F&& f) -> decltype(f())
{
  try {
    return f();
  }
  catch (const nlohmann::json::exception& e) {
    throw Error(Errc::decode_error, e.what());
  }
}

std::string slurp(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spill(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
}

} // namespace

std::string aggregator_view_json(const GroupParams& params, const AggregatorView& view)
{
  ordered_json j;
  j["format"] = "dcnet-aggregator/1";
  j["group"] = group_json(params, false);
  j["level"] = static_cast<int>(view.level);
  j["players"] = view.players;
  j["rounds"] = view.rounds;
  j["padded_rounds"] = view.padded_rounds;
  auto roots = ordered_json::array();
  for (const auto& r : view.roots) roots.push_back(to_hex(r));
  j["roots"] = roots;
  auto cs = ordered_json::array();
  for (const auto& row : view.commitments) {
    auto arr = ordered_json::array();
    for (const auto& c : row) arr.push_back(hex_of(c.value));
    cs.push_back(arr);
  }
  j["commitments"] = cs;
  return j.dump(1);
}

AggregatorView parse_aggregator_view(const std::string& text, GroupParams* params)
{
  auto j = parse_checked(text, "dcnet-aggregator/1");
  return guarded([&] {
    GroupParams gp = group_of(j.at("group"));
    AggregatorView v;
    const int level = j.at("level").get<int>();
    if (level < 1 || level > 4) throw Error(Errc::decode_error, "level must be 1-4");
    v.level = static_cast<Level>(level);
    v.players = j.at("players").get<std::size_t>();
    v.rounds = j.at("rounds").get<Round>();
    v.padded_rounds = j.at("padded_rounds").get<Round>();
    for (const auto& r : j.at("roots")) {
      Bytes b = from_hex(r.get<std::string>());
      if (b.size() != 32) throw Error(Errc::decode_error, "root must be 32 octets");
      Digest d;
      std::copy(b.begin(), b.end(), d.begin());
      v.roots.push_back(d);
    }
    for (const auto& row : j.at("commitments")) {
      std::vector<Commitment> cs;
      for (const auto& c : row) {
        Element e{mpz_of(c)};
        if (!in_subgroup(gp, e.value)) throw Error(Errc::decode_error, "commitment outside subgroup");
        cs.push_back(e);
      }
      v.commitments.push_back(std::move(cs));
    }
    if (params) *params = gp;
    return v;
  });
}

std::string player_view_json(const GroupParams& params, const PlayerView& view)
{
  ordered_json j;
  j["format"] = "dcnet-player/1";
  j["group"] = group_json(params, false);
  j["index"] = view.index;
  j["rounds"] = view.rounds;
  j["seed"] = to_hex(view.seed);
  j["fixed_k"] = scalars_json(view.fixed_k);
  return j.dump(1);
}

PlayerView parse_player_view(const std::string& text, GroupParams* params)
{
  auto j = parse_checked(text, "dcnet-player/1");
  return guarded([&] {
    GroupParams gp = group_of(j.at("group"));
    PlayerView v;
    v.index = j.at("index").get<PlayerId>();
    v.rounds = j.at("rounds").get<Round>();
    v.seed = seed_of(j.at("seed"));
    v.fixed_k = scalars_of(gp, j.at("fixed_k"));
    if (params) *params = gp;
    return v;
  });
}

std::string correspondent_view_json(const GroupParams& params, const CorrespondentView& view,
                                    Role role)
{
  ordered_json j;
  j["format"] = "dcnet-correspondent/1";
  j["group"] = group_json(params, false);
  j["role"] = role == Role::correspondent_a ? "a" : "b";
  j["index"] = view.index;
  j["peer"] = view.peer;
  j["rounds"] = view.rounds;
  j["alpha"] = hex_of(view.alpha.value);
  auto seeds = ordered_json::array();
  for (const auto& s : view.seeds) seeds.push_back(to_hex(s));
  j["seeds"] = seeds;
  j["fixed_k"] = scalars_json(view.fixed_k);
  return j.dump(1);
}

CorrespondentView parse_correspondent_view(const std::string& text, GroupParams* params, Role* role)
{
  auto j = parse_checked(text, "dcnet-correspondent/1");
  return guarded([&] {
    GroupParams gp = group_of(j.at("group"));
    CorrespondentView v;
    const std::string r = j.at("role").get<std::string>();
    if (r != "a" && r != "b") throw Error(Errc::decode_error, "role must be a or b");
    v.index = j.at("index").get<PlayerId>();
    v.peer = j.at("peer").get<PlayerId>();
    v.rounds = j.at("rounds").get<Round>();
    v.alpha = Scalar(mpz_of(j.at("alpha")));
    for (const auto& s : j.at("seeds")) v.seeds.push_back(seed_of(s));
    v.fixed_k = scalars_of(gp, j.at("fixed_k"));
    GroupParams trapdoor = with_trapdoor(gp, v.alpha);
    if (trapdoor.h != gp.h) throw Error(Errc::decode_error, "alpha does not open h");
    if (params) *params = trapdoor;
    if (role) *role = r == "a" ? Role::correspondent_a : Role::correspondent_b;
    return v;
  });
}

void write_setup(const fs::path& dir, const SetupBundle& bundle)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  const GroupParams& gp = bundle.public_params;
  write_group_file(dir / "group.txt", gp);
  ordered_json manifest{{"format", "dcnet-setup/1"},
                        {"players", bundle.options.players},
                        {"rounds", bundle.options.rounds},
                        {"level", static_cast<int>(bundle.options.level)}};
  spill(dir / "manifest.json", manifest.dump(1));
  spill(dir / "aggregator.json", aggregator_view_json(gp, bundle.aggregator));
  for (const auto& pv : bundle.players)
    spill(dir / ("player-" + std::to_string(pv.index) + ".json"), player_view_json(gp, pv));
  spill(dir / ("correspondent-" + std::to_string(bundle.view_a.index) + ".json"),
        correspondent_view_json(gp, bundle.view_a, Role::correspondent_a));
  spill(dir / ("correspondent-" + std::to_string(bundle.view_b.index) + ".json"),
        correspondent_view_json(gp, bundle.view_b, Role::correspondent_b));
}

SetupBundle read_setup(const fs::path& dir)
{
  SetupBundle b;
  auto manifest = guarded([&] { return ordered_json::parse(slurp(dir / "manifest.json")); });
  if (manifest.value("format", "") != "dcnet-setup/1")
    throw Error(Errc::decode_error, "expected a dcnet-setup/1 manifest");
  guarded([&] {
    b.options.players = manifest.at("players").get<std::size_t>();
    b.options.rounds = manifest.at("rounds").get<Round>();
    b.options.level = static_cast<Level>(manifest.at("level").get<int>());
    return 0;
  });
  b.public_params = read_group_file(dir / "group.txt").public_part();

  auto same_group = [&](const GroupParams& gp) {
    if (gp.p != b.public_params.p || gp.q != b.public_params.q || gp.g != b.public_params.g
        || gp.h != b.public_params.h)
      throw Error(Errc::decode_error, "view group differs from group.txt");
  };

  GroupParams gp;
  b.aggregator = parse_aggregator_view(slurp(dir / "aggregator.json"), &gp);
  same_group(gp);
  for (std::size_t i = 1; i <= b.options.players; ++i) {
    auto pv = parse_player_view(slurp(dir / ("player-" + std::to_string(i) + ".json")), &gp);
    same_group(gp);
    if (pv.index != i) throw Error(Errc::decode_error, "player file index mismatch");
    b.players.push_back(std::move(pv));
  }

  int found = 0;
  for (std::size_t i = 1; i <= b.options.players; ++i) {
    const fs::path p = dir / ("correspondent-" + std::to_string(i) + ".json");
    if (!fs::exists(p)) continue;
    Role role;
    auto cv = parse_correspondent_view(slurp(p), &gp, &role);
    same_group(gp.public_part());
    if (cv.index != i) throw Error(Errc::decode_error, "correspondent file index mismatch");
    (role == Role::correspondent_a ? b.view_a : b.view_b) = std::move(cv);
    ++found;
  }
  if (found != 2 || b.view_a.index == 0 || b.view_b.index == 0)
    throw Error(Errc::decode_error, "setup needs one correspondent file for each of a and b");
  b.options.correspondent_a = b.view_a.index;
  b.options.correspondent_b = b.view_b.index;
  if (b.aggregator.players != b.options.players || b.aggregator.rounds != b.options.rounds
      || b.aggregator.level != b.options.level)
    throw Error(Errc::decode_error, "aggregator view disagrees with the manifest");
  return b;
}

bool verification_material_consistent(const SetupBundle& bundle)
{
  const GroupParams& gp = bundle.public_params;
  const auto& agg = bundle.aggregator;
  const auto& keys = bundle.view_a;
  for (PlayerId i = 1; i <= agg.players; ++i) {
    PlayerView pv;
    pv.index = i;
    pv.rounds = keys.rounds;
    pv.seed = keys.seeds[i - 1];
    if (i == keys.seeds.size()) pv.fixed_k = keys.fixed_k;
    if (agg.level == Level::verified) {
      if (agg.commitments.size() != agg.players
          || agg.commitments[i - 1] != schedule_commitments(gp, pv, agg.rounds))
        return false;
    }
    else if (agg.level == Level::merkle) {
      auto cs = schedule_commitments(gp, pv, agg.padded_rounds);
      std::vector<Bytes> leaves;
      for (const auto& c : cs) leaves.push_back(encode_element(gp, c));
      MerkleSchedule tree(leaves, encode_element(gp, commit(gp, Scalar(0), Scalar(0))));
      if (agg.roots.size() != agg.players || agg.roots[i - 1] != tree.root()) return false;
    }
  }
  return true;
}

} // namespace dcnet
