#include "rbgka/gdh.hpp"

#include <algorithm>

#include "rbgka/errors.hpp"
#include "rbgka/wire.hpp"

namespace rbgka::gdh {

namespace {

const MemberView& view_of(const SubgroupState& s, const MemberId& id) {
  auto it = s.views.find(id);
  if (it == s.views.end()) throw UnknownMemberError("no such member: " + id);
  return it->second;
}

bool is_member(const SubgroupState& s, const MemberId& id) {
  return s.views.count(id) != 0;
}

// Deliver a broadcast to every surviving view: replace tags, recompute KR.
// Each member performs exactly one exponentiation; they run in parallel, so
// the caller adds 1 to the serial chain for this step.
void deliver(SubgroupState& s, const RekeyBroadcast& bc) {
  std::optional<KeyValue> agreed;
  for (auto& [id, view] : s.views) {
    const KeyValue k = compute_subgroup_key(view, bc, s.params);
    view.tags = bc.values;
    view.epoch = bc.epoch;
    view.key = k;
    if (!agreed) {
      agreed = k;
    } else if (*agreed != k) {
      throw InvariantViolation("members disagree on the subgroup key");
    }
  }
  s.key = agreed;
  s.last_broadcast = bc;
  s.epoch = bc.epoch;
}

// Drop a departed member from the roster and from everyone's retained state.
void prune(SubgroupState& s, const MemberId& gone) {
  s.members.erase(std::remove(s.members.begin(), s.members.end(), gone), s.members.end());
  s.views.erase(gone);
  for (auto& [id, view] : s.views) {
    view.basis.slots.erase(gone);
    view.tags.erase(gone);
  }
}

// Shared by member_leave and controller_leave: `acting` replaces its share
// with `fresh` and re-tags every survivor off its basis. Assumes the leaver
// has already been pruned from `s`.
EventResult rekey_after_leave(SubgroupState s, MemberView departed_snapshot,
                              const MemberId& acting, const PrivateShare& fresh,
                              const char* label) {
  EventResult out{std::move(s), {}, {}, std::nullopt, std::nullopt,
                  std::move(departed_snapshot)};
  SubgroupState& st = out.state;
  st.controller = acting;

  if (st.members.size() < 2) {
    // Lone survivor: no key to agree on until the next join.
    st.epoch += 1;
    st.key.reset();
    st.last_broadcast.reset();
    for (auto& [id, view] : st.views) {
      view.tags.clear();
      view.key.reset();
      view.epoch = st.epoch;
    }
    return out;
  }

  MemberView& actor = st.views.at(acting);
  actor.share = fresh;

  std::uint64_t raise_exps = 0;
  RekeyBroadcast bc{st.epoch + 1, acting, {}};
  for (const MemberId& m : st.members) {
    if (m == acting) {
      bc.values.emplace(m, actor.basis.cardinal);
    } else {
      bc.values.emplace(m, mod_exp(actor.basis.slots.at(m), fresh, st.params));
      ++raise_exps;
    }
  }

  deliver(st, bc);
  out.broadcast = bc;
  out.messages.push_back(Message{Message::Kind::broadcast, 1, acting, std::nullopt,
                                 bc.values.size(), label});
  out.cost = CostLedger{1, 0, bc.values.size(), raise_exps + 1};
  return out;
}

}  // namespace

SubgroupState subgroup_create(const GroupParams& params, const MemberId& founder,
                              const PrivateShare& founder_share) {
  // A founder's basis has no slots; its cardinal is the bare generator, which
  // makes the two-member bootstrap a plain instance of member_join.
  MemberBasis basis{{}, KeyValue(params.g(), params)};
  MemberView view{founder, founder_share, std::move(basis), {}, 0, std::nullopt};
  SubgroupState s{params, {founder}, founder, {}, 0, std::nullopt, std::nullopt};
  s.views.emplace(founder, std::move(view));
  return s;
}

EventResult member_join(const SubgroupState& state, const MemberId& joiner,
                        const PrivateShare& joiner_share,
                        const PrivateShare& controller_refresh) {
  if (is_member(state, joiner)) throw DuplicateMemberError("already a member: " + joiner);
  if (state.members.empty()) throw ProtocolError("subgroup has no members");

  EventResult out{state, {}, {}, std::nullopt, std::nullopt, std::nullopt};
  SubgroupState& st = out.state;
  const std::size_t X = st.members.size();

  MemberView& ctl = st.views.at(st.controller);
  ctl.share = controller_refresh;

  // Round 1: controller raises its basis by the replacement share and hands
  // the result to the joiner. Its own slot is the cardinal it holds.
  std::uint64_t ctl_exps = 0;
  JoinHandoff handoff{st.epoch + 1, st.controller, {},
                      mod_exp(ctl.basis.cardinal, controller_refresh, st.params)};
  ++ctl_exps;
  for (const MemberId& m : st.members) {
    if (m == st.controller) {
      handoff.slots.emplace(m, ctl.basis.cardinal);
    } else {
      handoff.slots.emplace(m, mod_exp(ctl.basis.slots.at(m), controller_refresh, st.params));
      ++ctl_exps;
    }
  }

  // Round 2: joiner folds its share into every slot and broadcasts the tags;
  // its own tag is the handoff cardinal, which still misses its contribution.
  std::uint64_t join_exps = 0;
  RekeyBroadcast bc{st.epoch + 1, joiner, {}};
  for (const auto& [m, v] : handoff.slots) {
    bc.values.emplace(m, mod_exp(v, joiner_share, st.params));
    ++join_exps;
  }
  bc.values.emplace(joiner, handoff.cardinal);

  st.members.push_back(joiner);
  st.controller = joiner;
  MemberView jview{joiner, joiner_share,
                   MemberBasis{handoff.slots, handoff.cardinal},
                   {}, st.epoch, std::nullopt};
  st.views.emplace(joiner, std::move(jview));

  deliver(st, bc);

  out.handoff = handoff;
  out.broadcast = bc;
  out.messages.push_back(Message{Message::Kind::unicast, 1, handoff.sender, joiner,
                                 handoff.slots.size() + 1, "key-handoff"});
  out.messages.push_back(Message{Message::Kind::broadcast, 2, joiner, std::nullopt,
                                 bc.values.size(), "join-rekey"});
  // chain: controller raises (X), then joiner raises (X), then everyone's
  // single key exponentiation in parallel (1)
  out.cost = CostLedger{2, handoff.slots.size() + 1, bc.values.size(),
                        ctl_exps + join_exps + 1};
  return out;
}

EventResult member_leave(const SubgroupState& state, const MemberId& leaver,
                         const PrivateShare& controller_refresh) {
  if (!is_member(state, leaver)) throw UnknownMemberError("no such member: " + leaver);
  if (leaver == state.controller)
    throw RoleMismatchError("member is the controller; use controller_leave");

  SubgroupState st = state;
  MemberView snapshot = view_of(state, leaver);
  prune(st, leaver);
  return rekey_after_leave(std::move(st), std::move(snapshot), state.controller,
                           controller_refresh, "leave-rekey");
}

EventResult controller_leave(const SubgroupState& state,
                             const PrivateShare& successor_refresh) {
  if (state.members.size() < 2)
    throw ProtocolError("controller_leave needs a successor member");

  const MemberId leaver = state.controller;
  const MemberId successor = state.members[state.members.size() - 2];
  SubgroupState st = state;
  MemberView snapshot = view_of(state, leaver);
  prune(st, leaver);
  return rekey_after_leave(std::move(st), std::move(snapshot), successor,
                           successor_refresh, "succession-rekey");
}

SubgroupState roster_drop(const SubgroupState& state, const MemberId& member) {
  if (!is_member(state, member)) throw UnknownMemberError("no such member: " + member);
  SubgroupState st = state;
  const bool was_controller = member == st.controller;
  prune(st, member);
  if (st.members.empty()) return st;
  if (was_controller) st.controller = st.members.back();
  if (st.members.size() < 2) {
    st.key.reset();
    st.last_broadcast.reset();
    for (auto& [id, view] : st.views) {
      view.tags.clear();
      view.key.reset();
    }
  }
  return st;
}

KeyValue compute_subgroup_key(const MemberView& view, const RekeyBroadcast& bc,
                              const GroupParams& params) {
  if (bc.epoch != view.epoch + 1)
    throw StaleEpochError("broadcast is for epoch " + std::to_string(bc.epoch) +
                          ", member sits at " + std::to_string(view.epoch));
  auto it = bc.values.find(view.id);
  if (it == bc.values.end())
    throw UnknownMemberError("broadcast carries no tagged value for " + view.id);
  return mod_exp(it->second, view.share, params);
}

MemberCensus census(const MemberView& view) {
  MemberCensus c;
  c.keys = 1 + (view.key ? 1 : 0);  // own share + KR
  // current tagged set plus the retained handoff cardinal
  c.public_values = view.tags.size() + 1;
  return c;
}

std::vector<std::uint8_t> serialize_rekey_broadcast(const RekeyBroadcast& bc) {
  std::vector<std::uint8_t> out;
  wire::put_u64(out, bc.epoch);
  wire::put_string(out, bc.sender);
  wire::put_u32(out, static_cast<std::uint32_t>(bc.values.size()));
  for (const auto& [m, v] : bc.values) {
    wire::put_string(out, m);
    wire::put_bigint(out, v.value());
  }
  return out;
}

RekeyBroadcast parse_rekey_broadcast(const std::vector<std::uint8_t>& bytes,
                                     const GroupParams& params) {
  wire::Reader r(bytes);
  RekeyBroadcast bc{r.u64(), r.string(), {}};
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    MemberId m = r.string();
    bc.values.emplace(std::move(m), KeyValue(r.bigint(), params));
  }
  if (!r.done()) throw ProtocolError("trailing bytes after broadcast record");
  return bc;
}

}  // namespace rbgka::gdh
