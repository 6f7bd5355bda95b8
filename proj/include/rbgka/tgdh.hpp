#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rbgka/crypto.hpp"
#include "rbgka/message.hpp"

// Binary blinded-key tree over the gateway members, producing the outer key
// KG. Every node (l,v) carries a secret K and a public blinded key g^K; a
// parent's secret is sibling_BK^own_secret, so both children derive it. The
// member that joined last acts as outer controller. New members are inserted
// at the root: the old tree becomes one child of a fresh root, the joiner the
// other, so KG = old_root_BK^joiner_secret. Broadcasts carry the non-root
// blinded keys; the root's is revealed only inside a join handoff.
namespace rbgka::tgdh {

// (level, index): the root is (0,0), children of (l,v) are (l+1,2v) and
// (l+1,2v+1). The coordinate set alone fixes the tree shape.
struct NodeCoords {
  int level = 0;
  std::uint64_t index = 0;
  friend auto operator<=>(const NodeCoords&, const NodeCoords&) = default;
};

struct NodeData {
  // absent on the root between joins (it is never broadcast; the next join's
  // refresh recomputes it for the handoff)
  std::optional<KeyValue> blinded;
  std::optional<MemberId> owner;  // leaves only
};

// One gateway's private knowledge: its leaf secret and the chain of secrets
// up its key-path (leaf first, root secret last). path_secrets.back() is the
// raw KG.
struct GatewayView {
  MemberId id;
  PrivateShare leaf_secret;
  std::vector<Bigint> path_secrets;
  std::uint64_t epoch = 0;
  std::optional<KeyValue> key;
};

struct TreeRecord {
  NodeCoords coords;
  std::optional<KeyValue> blinded;
  std::optional<MemberId> owner;
};

// Preorder snapshot of the tree. Carries non-root blinded keys when used as
// the rekey broadcast; a join handoff additionally includes the root's.
struct TreeBroadcast {
  std::uint64_t epoch = 0;
  MemberId sender;
  std::vector<TreeRecord> records;
  std::size_t key_units() const;  // records carrying a blinded key
};

struct KeyTree {
  GroupParams params;
  std::map<NodeCoords, NodeData> nodes;
  std::map<MemberId, NodeCoords> leaves;
  MemberId controller;
  std::map<MemberId, GatewayView> views;
  std::uint64_t epoch = 0;
  std::optional<KeyValue> key;  // agreed KG; unset below two leaves
};

struct TreeEventResult {
  KeyTree tree;
  std::vector<Message> messages;
  CostLedger cost;
  std::optional<TreeBroadcast> handoff;    // joins: refreshed old tree, root BK included
  std::optional<TreeBroadcast> broadcast;  // any event that rekeyed
  std::optional<GatewayView> departed;     // leaves: pre-event view snapshot
};

// sibling_blinded^own_secret mod p; equal from both sides of a node.
KeyValue compute_parent_secret(const KeyValue& sibling_blinded, const Bigint& own_secret,
                               const GroupParams& params);
// Same, for an optional blinded key; throws if it is absent.
KeyValue compute_parent_secret(const std::optional<KeyValue>& sibling_blinded,
                               const Bigint& own_secret, const GroupParams& params);

KeyTree tree_create(const GroupParams& params, const MemberId& first,
                    const PrivateShare& first_secret);

// Controller refreshes its leaf secret and hands the re-blinded old tree to
// the joiner, who mounts it under a fresh root beside its own leaf, becomes
// controller, and broadcasts the new tree.
TreeEventResult tree_join(const KeyTree& tree, const MemberId& joiner,
                          const PrivateShare& joiner_secret,
                          const PrivateShare& controller_refresh);

// Remove a non-controller leaf; its sibling subtree is promoted into the
// vacated parent slot. Ancestors of the promotion point that the controller
// cannot rederive are patched by a sponsor (the leftmost leaf under the
// promoted node) before the controller refreshes and broadcasts.
TreeEventResult tree_leave(const KeyTree& tree, const MemberId& leaver,
                           const PrivateShare& controller_refresh);

// The controller's leaf is removed; the leftmost leaf of its sibling subtree
// succeeds it, refreshes, and broadcasts. The successor's own key-path covers
// everything the removal invalidated, so no patch is needed.
TreeEventResult tree_controller_leave(const KeyTree& tree,
                                      const PrivateShare& successor_refresh);

// What one gateway does with a broadcast: fold its leaf secret up the
// key-path using the co-path blinded keys. Throws StaleEpochError unless the
// broadcast is for the epoch right after the view's, UnknownMemberError if
// the view's leaf is missing, ProtocolError on a missing co-path value.
KeyValue compute_outer_key(const GatewayView& view, const TreeBroadcast& bc,
                           const GroupParams& params);

// storage census for one gateway: path secrets held and public blinded keys
// retained (the non-root set)
struct GatewayCensus {
  std::size_t keys = 0;
  std::size_t public_values = 0;
};
GatewayCensus census(const KeyTree& tree, const MemberId& member);

std::vector<std::uint8_t> serialize_tree_broadcast(const TreeBroadcast& bc);
TreeBroadcast parse_tree_broadcast(const std::vector<std::uint8_t>& bytes,
                                   const GroupParams& params);

}  // namespace rbgka::tgdh
