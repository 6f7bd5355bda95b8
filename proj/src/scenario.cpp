#include "rbgka/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rbgka::sim {

namespace {

struct Options {
  int line;
  std::map<std::string, std::string> kv;

  std::optional<std::string> take(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  }

  std::optional<Bigint> take_int(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (v->empty() || !std::all_of(v->begin(), v->end(), [](unsigned char c) {
          return std::isdigit(c);
        }))
      throw ScenarioParseError(line, key + " wants a decimal integer, got '" + *v + "'");
    return Bigint(*v);
  }

  std::optional<double> take_num(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    try {
      std::size_t used = 0;
      double d = std::stod(*v, &used);
      if (used != v->size() || d < 0) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ScenarioParseError(line, key + " wants a non-negative number, got '" + *v + "'");
    }
  }

  void done() const {
    if (!kv.empty())
      throw ScenarioParseError(line, "unknown option '" + kv.begin()->first + "'");
  }
};

std::vector<std::uint8_t> parse_hex(const std::string& hex, int line) {
  if (hex.size() % 2 != 0)
    throw ScenarioParseError(line, "payload hex must have even length");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ScenarioParseError(line, std::string("bad hex digit '") + c + "'");
  };
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  return out;
}

void fill_profile(region::NodeProfile& p, Options& opt) {
  if (auto v = opt.take_num("processing")) p.processing = *v;
  if (auto v = opt.take_num("memory")) p.memory = *v;
  if (auto v = opt.take_num("battery")) p.battery = *v;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool events_started = false;

  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);

    std::istringstream ls(raw);
    std::string keyword;
    if (!(ls >> keyword)) continue;

    std::string id;
    if (!(ls >> id)) throw ScenarioParseError(line, keyword + " needs a member id");

    Options opt{line, {}};
    std::string tok;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ScenarioParseError(line, "expected key=value, got '" + tok + "'");
      if (!opt.kv.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second)
        throw ScenarioParseError(line, "duplicate option '" + tok.substr(0, eq) + "'");
    }

    if (keyword == "member") {
      if (events_started)
        throw ScenarioParseError(line, "member lines must precede all events");
      region::NodeProfile p{id, 0, 0, 0};
      fill_profile(p, opt);
      if (auto v = opt.take_int("share")) sc.setup_shares.emplace(id, *v);
      if (auto v = opt.take_int("tree_share")) sc.setup_tree_shares.emplace(id, *v);
      opt.done();
      for (const auto& prev : sc.setup)
        if (prev.id == id) throw ScenarioParseError(line, "member " + id + " declared twice");
      sc.setup.push_back(p);
      continue;
    }

    events_started = true;
    ScenarioEvent ev;
    ev.kind = keyword;
    ev.line = line;

    if (keyword == "send") {
      SendEvent s;
      s.source = id;
      auto to = opt.take("to");
      if (!to) throw ScenarioParseError(line, "send needs to=DEST");
      s.destination = *to;
      auto payload = opt.take("payload");
      if (!payload) throw ScenarioParseError(line, "send needs payload=HEX");
      s.payload = parse_hex(*payload, line);
      opt.done();
      ev.send = std::move(s);
      sc.events.push_back(std::move(ev));
      continue;
    }

    region::Event m;
    m.member = id;
    if (keyword == "join") {
      m.kind = region::Event::Kind::member_join;
      m.profile.id = id;
      fill_profile(m.profile, opt);
      if (auto v = opt.take("subgroup")) {
        if (*v == "new") {
          m.fresh_subgroup = true;
        } else if (!v->empty() &&
                   std::all_of(v->begin(), v->end(),
                               [](unsigned char c) { return std::isdigit(c); })) {
          m.target = static_cast<region::SubgroupId>(std::stoul(*v));
        } else {
          throw ScenarioParseError(line, "subgroup wants a number or 'new', got '" + *v + "'");
        }
      }
      m.share = opt.take_int("share");
      m.refresh = opt.take_int("refresh");
      m.tree_share = opt.take_int("tree_share");
      m.tree_refresh = opt.take_int("tree_refresh");
    } else if (keyword == "leave") {
      m.kind = region::Event::Kind::member_leave;
      m.refresh = opt.take_int("refresh");
    } else if (keyword == "controller_leave") {
      m.kind = region::Event::Kind::subgroup_controller_leave;
      m.refresh = opt.take_int("refresh");
    } else if (keyword == "gateway_leave") {
      m.kind = region::Event::Kind::gateway_leave;
      m.refresh = opt.take_int("refresh");
      m.tree_refresh = opt.take_int("tree_refresh");
      m.tree_share = opt.take_int("tree_share");
    } else if (keyword == "outer_controller_leave") {
      m.kind = region::Event::Kind::outer_controller_leave;
      m.tree_refresh = opt.take_int("tree_refresh");
      m.tree_share = opt.take_int("tree_share");
    } else {
      throw ScenarioParseError(line, "unknown keyword '" + keyword + "'");
    }
    opt.done();
    ev.membership = std::move(m);
    sc.events.push_back(std::move(ev));
  }

  return sc;
}

}  // namespace rbgka::sim
