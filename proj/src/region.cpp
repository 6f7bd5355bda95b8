#include "rbgka/region.hpp"

#include <algorithm>

#include "rbgka/errors.hpp"

namespace rbgka::region {

namespace {

PrivateShare resolve(const std::optional<Bigint>& scripted, DeterministicRng& rng,
                     const GroupParams& params) {
  if (scripted) return PrivateShare(*scripted, params);
  return rng.sample_share(params);
}

std::optional<Bigint> scripted(const std::map<MemberId, Bigint>& m, const MemberId& id) {
  auto it = m.find(id);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

Subgroup* find_mutable(RegionTopology& t, const MemberId& member) {
  for (auto& [sid, sub] : t.subgroups) {
    const auto& ms = sub.state.members;
    if (std::find(ms.begin(), ms.end(), member) != ms.end()) return &sub;
  }
  return nullptr;
}

void require_role(const RegionTopology& t, const MemberId& member, Role need, const char* event) {
  Role have = role_of(t, member);
  if (have != need)
    throw RoleMismatchError(std::string(event) + " names " + member + ", whose role is " +
                            role_name(have));
}

// Stages run back to back, so later messages shift into fresh rounds and the
// ledgers add up; tallying the combined message list then matches the ledger.
void append_stage(EventOutcome& out, std::vector<Message> msgs, const CostLedger& cost) {
  for (auto& m : msgs) m.round += static_cast<int>(out.cost.rounds);
  out.messages.insert(out.messages.end(), std::make_move_iterator(msgs.begin()),
                      std::make_move_iterator(msgs.end()));
  out.cost += cost;
}

tgdh::KeyTree empty_tree(const GroupParams& params) {
  return tgdh::KeyTree{params, {}, {}, {}, {}, 0, std::nullopt};
}

}  // namespace

const char* role_name(Role r) {
  switch (r) {
    case Role::member: return "member";
    case Role::subgroup_controller: return "subgroup controller";
    case Role::gateway: return "gateway";
    case Role::outer_controller: return "outer controller";
  }
  return "?";
}

MemberId select_gateway(const std::vector<MemberId>& members,
                        const std::map<MemberId, NodeProfile>& profiles) {
  if (members.empty()) throw ProtocolError("cannot elect a gateway from an empty subgroup");
  const MemberId* best = nullptr;
  double best_score = 0;
  for (const auto& id : members) {
    auto it = profiles.find(id);
    double sc = it == profiles.end() ? 0 : it->second.score();
    if (!best || sc > best_score || (sc == best_score && id < *best)) {
      best = &id;
      best_score = sc;
    }
  }
  return *best;
}

RegionTopology form_subgroups(const std::vector<NodeProfile>& members, const Config& config,
                              const GroupParams& params, DeterministicRng& rng,
                              const std::map<MemberId, Bigint>& shares,
                              const std::map<MemberId, Bigint>& tree_shares) {
  if (members.empty()) throw ProtocolError("cannot form a region from zero members");
  if (config.max_subgroup_size < 2) throw ProtocolError("max subgroup size must be at least 2");

  RegionTopology t{params, config, {}, empty_tree(params), {}, 0};
  for (const auto& prof : members) {
    if (!t.profiles.emplace(prof.id, prof).second)
      throw DuplicateMemberError("duplicate member in formation: " + prof.id);
  }

  const std::size_t n = members.size();
  const std::size_t s = (n + config.max_subgroup_size - 1) / config.max_subgroup_size;
  const std::size_t base = n / s;
  const std::size_t extra = n % s;  // the first `extra` subgroups take one more

  std::size_t cursor = 0;
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    const SubgroupId sid = t.next_subgroup_id++;

    gdh::SubgroupState st = gdh::subgroup_create(
        params, members[cursor].id, resolve(scripted(shares, members[cursor].id), rng, params));
    std::vector<MemberId> ids{members[cursor].id};
    for (std::size_t k = 1; k < size; ++k) {
      const NodeProfile& joiner = members[cursor + k];
      PrivateShare keep = st.views.at(st.controller).share;
      auto res = gdh::member_join(st, joiner.id, resolve(scripted(shares, joiner.id), rng, params),
                                  keep);
      st = std::move(res.state);
      ids.push_back(joiner.id);
    }
    cursor += size;

    MemberId gw = select_gateway(ids, t.profiles);
    t.subgroups.emplace(sid, Subgroup{sid, std::move(st), gw});
  }

  for (const auto& [sid, sub] : t.subgroups) {
    if (t.tree.leaves.empty()) {
      t.tree = tgdh::tree_create(params, sub.gateway,
                                 resolve(scripted(tree_shares, sub.gateway), rng, params));
    } else {
      PrivateShare keep = t.tree.views.at(t.tree.controller).leaf_secret;
      auto res = tgdh::tree_join(t.tree, sub.gateway,
                                 resolve(scripted(tree_shares, sub.gateway), rng, params), keep);
      t.tree = std::move(res.tree);
    }
  }

  check_invariants(t);
  return t;
}

const Subgroup* find_member_subgroup(const RegionTopology& t, const MemberId& member) {
  return find_mutable(const_cast<RegionTopology&>(t), member);
}

Role role_of(const RegionTopology& t, const MemberId& member) {
  const Subgroup* sub = find_member_subgroup(t, member);
  if (!sub) throw UnknownMemberError("no such member: " + member);
  if (!t.tree.leaves.empty() && t.tree.controller == member) return Role::outer_controller;
  if (sub->gateway == member) return Role::gateway;
  if (sub->state.controller == member && sub->state.members.size() > 1)
    return Role::subgroup_controller;
  return Role::member;
}

std::map<MemberId, Role> roles(const RegionTopology& t) {
  std::map<MemberId, Role> out;
  for (const auto& [sid, sub] : t.subgroups)
    for (const auto& m : sub.state.members) out.emplace(m, role_of(t, m));
  return out;
}

EventOutcome handle_event(const RegionTopology& topo, const Event& ev, DeterministicRng& rng) {
  EventOutcome out{topo, {}, {}, {}, std::nullopt, std::nullopt, std::nullopt};
  RegionTopology& t = out.topology;
  const GroupParams& params = t.params;

  switch (ev.kind) {
    case Event::Kind::member_join: {
      if (find_member_subgroup(t, ev.member))
        throw DuplicateMemberError("already a member: " + ev.member);

      std::optional<SubgroupId> sid;
      if (ev.target) {
        auto it = t.subgroups.find(*ev.target);
        if (it == t.subgroups.end())
          throw ProtocolError("no subgroup " + std::to_string(*ev.target));
        if (it->second.state.members.size() >= t.config.max_subgroup_size)
          throw ProtocolError("subgroup " + std::to_string(*ev.target) + " is full");
        sid = *ev.target;
      } else if (!ev.fresh_subgroup) {
        for (const auto& [id, sub] : t.subgroups)
          if (sub.state.members.size() < t.config.max_subgroup_size) {
            sid = id;
            break;
          }
      }

      NodeProfile prof = ev.profile;
      prof.id = ev.member;
      t.profiles[ev.member] = prof;

      if (sid) {
        Subgroup& sub = t.subgroups.at(*sid);
        auto res = gdh::member_join(sub.state, ev.member, resolve(ev.share, rng, params),
                                    resolve(ev.refresh, rng, params));
        sub.state = std::move(res.state);
        append_stage(out, std::move(res.messages), res.cost);
        out.plan.kr.insert(*sid);
        out.subgroup = *sid;
      } else {
        // no room (or a fresh subgroup was asked for): the joiner founds one
        // and its gateway leaf enters the outer tree
        const SubgroupId nid = t.next_subgroup_id++;
        gdh::SubgroupState st =
            gdh::subgroup_create(params, ev.member, resolve(ev.share, rng, params));
        t.subgroups.emplace(nid, Subgroup{nid, std::move(st), ev.member});
        out.plan.founded = nid;
        out.subgroup = nid;
        if (t.tree.leaves.empty()) {
          t.tree = tgdh::tree_create(params, ev.member, resolve(ev.tree_share, rng, params));
          append_stage(out, {}, CostLedger{0, 0, 0, 1});  // blinds its own leaf
        } else {
          auto res = tgdh::tree_join(t.tree, ev.member, resolve(ev.tree_share, rng, params),
                                     resolve(ev.tree_refresh, rng, params));
          t.tree = std::move(res.tree);
          append_stage(out, std::move(res.messages), res.cost);
          out.plan.kg = true;
        }
      }
      break;
    }

    case Event::Kind::member_leave: {
      require_role(t, ev.member, Role::member, "member_leave");
      Subgroup& sub = *find_mutable(t, ev.member);
      out.subgroup = sub.id;
      out.departed_view = sub.state.views.at(ev.member);
      auto res = gdh::member_leave(sub.state, ev.member, resolve(ev.refresh, rng, params));
      sub.state = std::move(res.state);
      append_stage(out, std::move(res.messages), res.cost);
      out.plan.kr.insert(sub.id);
      t.profiles.erase(ev.member);
      break;
    }

    case Event::Kind::subgroup_controller_leave: {
      require_role(t, ev.member, Role::subgroup_controller, "subgroup_controller_leave");
      Subgroup& sub = *find_mutable(t, ev.member);
      out.subgroup = sub.id;
      out.departed_view = sub.state.views.at(ev.member);
      auto res = gdh::controller_leave(sub.state, resolve(ev.refresh, rng, params));
      sub.state = std::move(res.state);
      append_stage(out, std::move(res.messages), res.cost);
      out.plan.kr.insert(sub.id);
      t.profiles.erase(ev.member);
      break;
    }

    case Event::Kind::gateway_leave: {
      require_role(t, ev.member, Role::gateway, "gateway_leave");
      Subgroup& sub = *find_mutable(t, ev.member);
      const SubgroupId sid = sub.id;
      out.subgroup = sid;
      out.departed_view = sub.state.views.at(ev.member);
      out.departed_gateway = t.tree.views.at(ev.member);

      if (sub.state.members.size() == 1) {
        // lone gateway: the subgroup dissolves, only the outer tree rekeys
        out.plan.dissolved.insert(sid);
        t.subgroups.erase(sid);
        auto res = tgdh::tree_leave(t.tree, ev.member, resolve(ev.tree_refresh, rng, params));
        t.tree = std::move(res.tree);
        append_stage(out, std::move(res.messages), res.cost);
        out.plan.kg = true;
      } else {
        if (sub.state.controller == ev.member) {
          auto res = gdh::controller_leave(sub.state, resolve(ev.refresh, rng, params));
          sub.state = std::move(res.state);
          append_stage(out, std::move(res.messages), res.cost);
        } else {
          auto res = gdh::member_leave(sub.state, ev.member, resolve(ev.refresh, rng, params));
          sub.state = std::move(res.state);
          append_stage(out, std::move(res.messages), res.cost);
        }
        out.plan.kr.insert(sid);

        sub.gateway = select_gateway(sub.state.members, t.profiles);
        auto tl = tgdh::tree_leave(t.tree, ev.member, resolve(ev.tree_refresh, rng, params));
        t.tree = std::move(tl.tree);
        append_stage(out, std::move(tl.messages), tl.cost);
        // the join stage refreshes the sitting tree controller a second time
        auto tj = tgdh::tree_join(t.tree, sub.gateway, resolve(ev.tree_share, rng, params),
                                  rng.sample_share(params));
        t.tree = std::move(tj.tree);
        append_stage(out, std::move(tj.messages), tj.cost);
        out.plan.kg = true;
      }
      t.profiles.erase(ev.member);
      break;
    }

    case Event::Kind::outer_controller_leave: {
      require_role(t, ev.member, Role::outer_controller, "outer_controller_leave");
      Subgroup& sub = *find_mutable(t, ev.member);
      const SubgroupId sid = sub.id;
      out.subgroup = sid;
      out.departed_view = sub.state.views.at(ev.member);
      out.departed_gateway = t.tree.views.at(ev.member);

      const bool dissolves = sub.state.members.size() == 1;
      if (dissolves) {
        out.plan.dissolved.insert(sid);
        t.subgroups.erase(sid);
      } else {
        // the regional key stays put by mandate; the roster just shrinks
        sub.state = gdh::roster_drop(sub.state, ev.member);
      }

      if (t.tree.leaves.size() >= 2) {
        auto res = tgdh::tree_controller_leave(t.tree, resolve(ev.tree_refresh, rng, params));
        t.tree = std::move(res.tree);
        append_stage(out, std::move(res.messages), res.cost);
        out.plan.kg = true;
      } else {
        t.tree = empty_tree(params);
      }

      if (!dissolves) {
        Subgroup& survivor = t.subgroups.at(sid);
        survivor.gateway = select_gateway(survivor.state.members, t.profiles);
        if (t.tree.leaves.empty()) {
          t.tree = tgdh::tree_create(params, survivor.gateway,
                                     resolve(ev.tree_share, rng, params));
          append_stage(out, {}, CostLedger{0, 0, 0, 1});
        } else {
          auto tj = tgdh::tree_join(t.tree, survivor.gateway,
                                    resolve(ev.tree_share, rng, params),
                                    rng.sample_share(params));
          t.tree = std::move(tj.tree);
          append_stage(out, std::move(tj.messages), tj.cost);
          out.plan.kg = true;
        }
      }
      t.profiles.erase(ev.member);
      break;
    }
  }

  check_invariants(t);
  return out;
}

RouteResult route_message(const RegionTopology& t, const MemberId& source,
                          const MemberId& destination,
                          const std::vector<std::uint8_t>& plaintext) {
  const Subgroup* src = find_member_subgroup(t, source);
  if (!src) throw UnknownMemberError("source is not a member: " + source);
  const Subgroup* dst = find_member_subgroup(t, destination);
  if (!dst) throw UnknownMemberError("destination is not a member: " + destination);

  RouteResult result;
  auto hop = [&](std::string key_id, const KeyValue& key, const MemberId& from,
                 const MemberId& to) {
    SymmetricKey k = derive_symmetric_key(key);
    Ciphertext ct = seal(k, plaintext);
    result.delivered = open(k, ct);
    result.hops.push_back(RouteHop{std::move(key_id), from, to, std::move(ct)});
  };

  if (src->id == dst->id) {
    if (!src->state.key) throw ProtocolError("subgroup has no regional key");
    hop("KR:" + std::to_string(src->id), *src->state.key, source, destination);
    return result;
  }

  if (!t.tree.key) throw ProtocolError("no outer key below two gateways");
  if (src->state.key)
    hop("KR:" + std::to_string(src->id), *src->state.key, source, src->gateway);
  hop("KG", *t.tree.key, src->gateway, dst->gateway);
  if (dst->state.key)
    hop("KR:" + std::to_string(dst->id), *dst->state.key, dst->gateway, destination);
  return result;
}

void check_invariants(const RegionTopology& t) {
  std::set<MemberId> seen;
  std::set<MemberId> gateways;
  for (const auto& [sid, sub] : t.subgroups) {
    const auto& ms = sub.state.members;
    if (ms.empty()) throw InvariantViolation("empty subgroup " + std::to_string(sid));
    if (ms.size() > t.config.max_subgroup_size)
      throw InvariantViolation("subgroup " + std::to_string(sid) + " exceeds the size cap");
    for (const auto& m : ms)
      if (!seen.insert(m).second) throw InvariantViolation("member in two subgroups: " + m);
    if (std::find(ms.begin(), ms.end(), sub.gateway) == ms.end())
      throw InvariantViolation("gateway of " + std::to_string(sid) + " is not one of its members");
    gateways.insert(sub.gateway);

    if (ms.size() >= 2) {
      if (!sub.state.key)
        throw InvariantViolation("subgroup " + std::to_string(sid) + " lacks a regional key");
      for (const auto& [id, view] : sub.state.views)
        if (!view.key || !(*view.key == *sub.state.key))
          throw InvariantViolation("regional key disagreement at " + id);
    } else if (sub.state.key) {
      throw InvariantViolation("lone member holds a regional key");
    }
  }

  std::set<MemberId> leaves;
  for (const auto& [id, coords] : t.tree.leaves) leaves.insert(id);
  if (leaves != gateways) throw InvariantViolation("tree leaves and gateways diverge");

  if (t.tree.leaves.size() >= 2) {
    if (!t.tree.key) throw InvariantViolation("multi-leaf tree lacks an outer key");
    for (const auto& [id, view] : t.tree.views)
      if (!view.key || !(*view.key == *t.tree.key))
        throw InvariantViolation("outer key disagreement at " + id);
  } else if (t.tree.key) {
    throw InvariantViolation("outer key without two gateways");
  }

  std::set<MemberId> profiled;
  for (const auto& [id, p] : t.profiles) profiled.insert(id);
  if (profiled != seen) throw InvariantViolation("profile census diverges from membership");
}

}  // namespace rbgka::region
