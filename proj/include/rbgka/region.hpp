#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbgka/crypto.hpp"
#include "rbgka/gdh.hpp"
#include "rbgka/message.hpp"
#include "rbgka/tgdh.hpp"

// Two-level topology. Members are partitioned into subgroups, each running the
// contributory agreement for its regional key KR; every subgroup elects one
// gateway, and the gateways are the leaves of a shared key tree whose root
// yields the outer key KG. This module owns formation, role bookkeeping, the
// five membership events, and the KR/KG routing pipeline.
namespace rbgka::region {

struct NodeProfile {
  MemberId id;
  double processing = 0;
  double memory = 0;
  double battery = 0;
  double score() const { return processing + memory + battery; }
};

struct Config {
  std::size_t max_subgroup_size = 100;  // at least 2
};

using SubgroupId = std::uint32_t;

// Priority order when one member wears several hats: the outer controller is
// always a gateway, and a lone member is its own subgroup controller as well
// as its gateway. Events must name members by their effective role.
enum class Role { member, subgroup_controller, gateway, outer_controller };

const char* role_name(Role r);

struct Subgroup {
  SubgroupId id = 0;
  gdh::SubgroupState state;
  MemberId gateway;
};

struct RegionTopology {
  GroupParams params;
  Config config;
  std::map<SubgroupId, Subgroup> subgroups;
  tgdh::KeyTree tree;  // leaves are exactly the gateways; keyless below two leaves
  std::map<MemberId, NodeProfile> profiles;
  SubgroupId next_subgroup_id = 0;
};

struct Event {
  enum class Kind {
    member_join,
    member_leave,
    subgroup_controller_leave,
    gateway_leave,
    outer_controller_leave,
  };
  Kind kind = Kind::member_join;
  MemberId member;

  // join placement: explicit target, or force a fresh subgroup; with neither
  // set the joiner lands in the lowest-numbered subgroup that has room, and
  // overflows into a fresh one
  std::optional<SubgroupId> target;
  bool fresh_subgroup = false;
  NodeProfile profile;  // join only; feeds later gateway elections

  // scripted key material; anything unset is drawn from the event rng
  std::optional<Bigint> share;         // joiner's subgroup contribution
  std::optional<Bigint> refresh;       // subgroup rekey replacement share
  std::optional<Bigint> tree_share;    // new tree leaf secret
  std::optional<Bigint> tree_refresh;  // tree rekey replacement secret
};

// Which keys the event changed. Tests assert this against the mandate for the
// event kind; a dissolved subgroup's KR simply ceases to exist.
struct RekeyPlan {
  std::set<SubgroupId> kr;
  bool kg = false;
  std::set<SubgroupId> dissolved;
  std::optional<SubgroupId> founded;
};

struct EventOutcome {
  RegionTopology topology;
  RekeyPlan plan;
  std::vector<Message> messages;
  CostLedger cost;
  std::optional<SubgroupId> subgroup;  // where the event landed
  // pre-event snapshots of the leaver's knowledge, for exclusion tests
  std::optional<gdh::MemberView> departed_view;
  std::optional<tgdh::GatewayView> departed_gateway;
};

struct RouteHop {
  std::string key_id;  // "KR:<subgroup>" or "KG"
  MemberId sealed_by;
  MemberId opened_by;
  Ciphertext ciphertext;
};

struct RouteResult {
  std::vector<RouteHop> hops;
  std::vector<std::uint8_t> delivered;
};

// Highest combined score wins; ties go to the smallest id. Members without a
// profile score zero.
MemberId select_gateway(const std::vector<MemberId>& members,
                        const std::map<MemberId, NodeProfile>& profiles);

// Partition `members` into ceil(N / max) consecutive subgroups whose sizes
// differ by at most one, run the agreement in each, elect gateways, and build
// the outer tree. Scripted share maps let replayed setups keep chosen
// exponents: formation joins re-submit the sitting controller's current share
// instead of replacing it, so scripted values survive to the final keys.
RegionTopology form_subgroups(const std::vector<NodeProfile>& members, const Config& config,
                              const GroupParams& params, DeterministicRng& rng,
                              const std::map<MemberId, Bigint>& shares = {},
                              const std::map<MemberId, Bigint>& tree_shares = {});

const Subgroup* find_member_subgroup(const RegionTopology& t, const MemberId& member);
Role role_of(const RegionTopology& t, const MemberId& member);
std::map<MemberId, Role> roles(const RegionTopology& t);

// Apply one membership event. Throws RoleMismatchError when the event kind
// does not match the named member's effective role, and re-checks the
// topology invariants before returning.
EventOutcome handle_event(const RegionTopology& t, const Event& ev, DeterministicRng& rng);

// Intra-subgroup: one KR-sealed hop. Cross-subgroup: KR to the local gateway,
// KG between gateways, KR again on the far side. A lone gateway has no KR, so
// its end collapses onto the KG hop.
RouteResult route_message(const RegionTopology& t, const MemberId& source,
                          const MemberId& destination,
                          const std::vector<std::uint8_t>& plaintext);

// Throws InvariantViolation naming the first broken invariant: partition,
// gateway/leaf agreement, size cap, KR and KG agreement across views.
void check_invariants(const RegionTopology& t);

}  // namespace rbgka::region
