#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rbgka/crypto.hpp"
#include "rbgka/message.hpp"

// Contributory subgroup key agreement over an ordered member list. The member
// that joined last acts as controller. Rekeying works off each member's
// retained handoff ("basis"): the set of values it received when it joined,
// one slot per earlier member plus the cardinal (the product of every earlier
// contribution). A controller rekeys by replacing its own share and raising
// its basis, which works because only controllers ever change shares and the
// controller is always the most recent joiner among survivors - so a basis
// never goes stale with respect to members that joined before its owner.
namespace rbgka::gdh {

struct MemberBasis {
  // one value per still-present member that joined earlier; each misses that
  // member's contribution as well as the basis owner's
  std::map<MemberId, KeyValue> slots;
  // misses only the owner's contribution; for a founder this is the generator
  KeyValue cardinal;
};

// Everything one member knows. Tests walk these as the global observer.
struct MemberView {
  MemberId id;
  PrivateShare share;
  MemberBasis basis;
  std::map<MemberId, KeyValue> tags;  // latest broadcast, one value per member
  std::uint64_t epoch = 0;
  std::optional<KeyValue> key;  // KR as this member computed it
};

// Controller-to-joiner unicast: the joiner's future basis.
struct JoinHandoff {
  std::uint64_t epoch = 0;  // epoch the handoff leads to
  MemberId sender;
  std::map<MemberId, KeyValue> slots;  // one per existing member
  KeyValue cardinal;
};

// Tagged per-member values; member j recovers KR as values[j]^share.
struct RekeyBroadcast {
  std::uint64_t epoch = 0;
  MemberId sender;
  std::map<MemberId, KeyValue> values;
};

struct SubgroupState {
  GroupParams params;
  std::vector<MemberId> members;  // join order; controller is members.back()
  MemberId controller;
  std::map<MemberId, MemberView> views;
  std::uint64_t epoch = 0;
  std::optional<KeyValue> key;  // agreed KR; unset for a lone member
  std::optional<RekeyBroadcast> last_broadcast;
};

struct EventResult {
  SubgroupState state;
  std::vector<Message> messages;
  CostLedger cost;
  std::optional<JoinHandoff> handoff;       // joins only
  std::optional<RekeyBroadcast> broadcast;  // any event that rekeyed
  std::optional<MemberView> departed;       // leaves: pre-event view snapshot
};

SubgroupState subgroup_create(const GroupParams& params, const MemberId& founder,
                              const PrivateShare& founder_share);

// Existing controller replaces its share with controller_refresh, hands its
// basis to the joiner; the joiner extends every slot with its own share,
// broadcasts the tagged values, and becomes controller.
EventResult member_join(const SubgroupState& state, const MemberId& joiner,
                        const PrivateShare& joiner_share,
                        const PrivateShare& controller_refresh);

// Controller replaces its share and re-tags the survivors. The leaver's slot
// is dropped everywhere.
EventResult member_leave(const SubgroupState& state, const MemberId& leaver,
                         const PrivateShare& controller_refresh);

// The controller itself leaves; the previous controller (next most recent
// joiner) takes over and rekeys from its own basis.
EventResult controller_leave(const SubgroupState& state,
                             const PrivateShare& successor_refresh);

// Remove a member without rekeying (the containing layer uses this when a
// departure is mandated to leave KR untouched). No epoch bump, no messages.
SubgroupState roster_drop(const SubgroupState& state, const MemberId& member);

// What one member does with a broadcast. Throws StaleEpochError unless the
// broadcast is for the epoch right after the view's, UnknownMemberError if
// the member has no tagged value.
KeyValue compute_subgroup_key(const MemberView& view, const RekeyBroadcast& bc,
                              const GroupParams& params);

// storage census for one member: {keys, public values}
struct MemberCensus {
  std::size_t keys = 0;
  std::size_t public_values = 0;
};
MemberCensus census(const MemberView& view);

std::vector<std::uint8_t> serialize_rekey_broadcast(const RekeyBroadcast& bc);
RekeyBroadcast parse_rekey_broadcast(const std::vector<std::uint8_t>& bytes,
                                     const GroupParams& params);

}  // namespace rbgka::gdh
