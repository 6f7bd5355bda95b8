#include "rbgka/tgdh.hpp"

#include <algorithm>
#include <string>

#include "rbgka/errors.hpp"
#include "rbgka/wire.hpp"

namespace rbgka::tgdh {

namespace {

NodeCoords parent_of(NodeCoords c) { return {c.level - 1, c.index / 2}; }
NodeCoords sibling_of(NodeCoords c) { return {c.level, c.index ^ 1}; }
NodeCoords child_of(NodeCoords c, int side) { return {c.level + 1, c.index * 2 + side}; }

std::string coord_str(NodeCoords c) {
  return "(" + std::to_string(c.level) + "," + std::to_string(c.index) + ")";
}

bool is_leaf(const std::map<NodeCoords, NodeData>& nodes, NodeCoords c) {
  return nodes.find(child_of(c, 0)) == nodes.end();
}

NodeCoords leftmost_leaf(const std::map<NodeCoords, NodeData>& nodes, NodeCoords from) {
  while (!is_leaf(nodes, from)) from = child_of(from, 0);
  return from;
}

// Subtree snapshot as (turn sequence from the subtree root, node payload); the
// coordinate math is redone on placement, so subtrees can move between slots.
using Collected = std::vector<std::pair<std::vector<int>, NodeData>>;

void collect_subtree(const std::map<NodeCoords, NodeData>& nodes, NodeCoords at,
                     std::vector<int>& path, Collected& out) {
  out.emplace_back(path, nodes.at(at));
  for (int side : {0, 1}) {
    NodeCoords c = child_of(at, side);
    if (nodes.find(c) == nodes.end()) continue;
    path.push_back(side);
    collect_subtree(nodes, c, path, out);
    path.pop_back();
  }
}

void erase_subtree(std::map<NodeCoords, NodeData>& nodes, NodeCoords at) {
  for (int side : {0, 1}) {
    NodeCoords c = child_of(at, side);
    if (nodes.find(c) != nodes.end()) erase_subtree(nodes, c);
  }
  nodes.erase(at);
}

void place_subtree(std::map<NodeCoords, NodeData>& nodes, NodeCoords at,
                   const Collected& items) {
  for (const auto& [path, data] : items) {
    NodeCoords c = at;
    for (int side : path) c = child_of(c, side);
    nodes.emplace(c, data);
  }
}

void rebuild_leaf_index(KeyTree& t) {
  t.leaves.clear();
  for (const auto& [c, d] : t.nodes) {
    if (d.owner) t.leaves.emplace(*d.owner, c);
  }
}

void append_records(const std::map<NodeCoords, NodeData>& nodes, NodeCoords at,
                    bool include_root_blinded, std::vector<TreeRecord>& out) {
  const NodeData& d = nodes.at(at);
  TreeRecord r{at, d.blinded, d.owner};
  if (at.level == 0 && !include_root_blinded) r.blinded.reset();
  out.push_back(std::move(r));
  for (int side : {0, 1}) {
    NodeCoords c = child_of(at, side);
    if (nodes.find(c) != nodes.end()) append_records(nodes, c, include_root_blinded, out);
  }
}

TreeBroadcast snapshot(const KeyTree& t, std::uint64_t epoch, const MemberId& sender,
                       bool include_root_blinded) {
  TreeBroadcast bc{epoch, sender, {}};
  if (!t.nodes.empty()) append_records(t.nodes, {0, 0}, include_root_blinded, bc.records);
  return bc;
}

// Every view rederives its full key path from the new tree. Returns the
// longest per-member chain; the members work in parallel, so the caller adds
// this once to the serial count.
std::size_t deliver(KeyTree& t, std::uint64_t new_epoch) {
  std::size_t max_exps = 0;
  std::optional<KeyValue> agreed;
  for (auto& [id, v] : t.views) {
    NodeCoords c = t.leaves.at(id);
    Bigint cur = v.leaf_secret.value();
    v.path_secrets.assign(1, cur);
    std::size_t exps = 0;
    while (c.level > 0) {
      cur = compute_parent_secret(t.nodes.at(sibling_of(c)).blinded, cur, t.params).value();
      v.path_secrets.push_back(cur);
      ++exps;
      c = parent_of(c);
    }
    v.epoch = new_epoch;
    v.key = KeyValue(cur, t.params);
    if (!agreed) {
      agreed = v.key;
    } else if (*agreed != *v.key) {
      throw InvariantViolation("gateways disagree on the outer key");
    }
    max_exps = std::max(max_exps, exps);
  }
  t.key = agreed;
  t.epoch = new_epoch;
  return max_exps;
}

// Refresh `who`'s leaf secret and re-blind the ancestors its new secret
// invalidates, bottom-up. `through_root` additionally rederives the root's
// blinded key (a join handoff reveals it; plain rekeys never do, so their
// chain stops at the last node that still needs a blinded key; the root
// secret itself is everyone's parallel recomputation). Returns the
// exponentiation count of this chain.
std::size_t refresh_path(KeyTree& t, const MemberId& who, const PrivateShare& fresh,
                         bool through_root) {
  GatewayView& v = t.views.at(who);
  v.leaf_secret = fresh;
  NodeCoords c = t.leaves.at(who);
  Bigint cur = fresh.value();
  t.nodes.at(c).blinded = blind(fresh, t.params);
  std::size_t exps = 1;
  const int stop = through_root ? 0 : 1;
  while (c.level > stop) {
    cur = compute_parent_secret(t.nodes.at(sibling_of(c)).blinded, cur, t.params).value();
    c = parent_of(c);
    t.nodes.at(c).blinded = mod_exp(KeyValue(t.params.g(), t.params), cur, t.params);
    exps += 2;
  }
  return exps;
}

void reset_degenerate(KeyTree& t) {
  t.epoch += 1;
  t.key.reset();
  for (auto& [id, v] : t.views) {
    v.path_secrets.assign(1, v.leaf_secret.value());
    v.epoch = t.epoch;
    v.key.reset();
  }
}

// Shared removal step: drop `leaver`'s leaf and its parent, promote the
// sibling subtree into the vacated slot, and reindex. The root's blinded key
// is retired; whoever rekeys next rederives what is needed.
void remove_leaf(KeyTree& t, const MemberId& leaver, NodeCoords& promoted_slot) {
  NodeCoords lv = t.leaves.at(leaver);
  if (lv.level == 0) throw ProtocolError("cannot remove the only leaf");
  NodeCoords pv = parent_of(lv);
  Collected moved;
  std::vector<int> path;
  collect_subtree(t.nodes, sibling_of(lv), path, moved);
  erase_subtree(t.nodes, pv);
  place_subtree(t.nodes, pv, moved);
  t.views.erase(leaver);
  rebuild_leaf_index(t);
  if (t.nodes.size() > 1) t.nodes.at({0, 0}).blinded.reset();
  promoted_slot = pv;
}

}  // namespace

std::size_t TreeBroadcast::key_units() const {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.blinded) ++n;
  }
  return n;
}

KeyValue compute_parent_secret(const KeyValue& sibling_blinded, const Bigint& own_secret,
                               const GroupParams& params) {
  return mod_exp(sibling_blinded, own_secret, params);
}

KeyValue compute_parent_secret(const std::optional<KeyValue>& sibling_blinded,
                               const Bigint& own_secret, const GroupParams& params) {
  if (!sibling_blinded) throw ProtocolError("missing sibling blinded key");
  return compute_parent_secret(*sibling_blinded, own_secret, params);
}

KeyTree tree_create(const GroupParams& params, const MemberId& first,
                    const PrivateShare& first_secret) {
  KeyTree t{params, {}, {}, first, {}, 0, std::nullopt};
  t.nodes.emplace(NodeCoords{0, 0}, NodeData{blind(first_secret, params), first});
  GatewayView v{first, first_secret, {first_secret.value()}, 0, std::nullopt};
  t.views.emplace(first, std::move(v));
  t.leaves.emplace(first, NodeCoords{0, 0});
  return t;
}

TreeEventResult tree_join(const KeyTree& tree, const MemberId& joiner,
                          const PrivateShare& joiner_secret,
                          const PrivateShare& controller_refresh) {
  if (tree.leaves.count(joiner)) throw DuplicateMemberError("already a leaf: " + joiner);
  if (tree.nodes.empty()) throw ProtocolError("tree has no leaves");

  TreeEventResult out{tree, {}, {}, std::nullopt, std::nullopt, std::nullopt};
  KeyTree& t = out.tree;
  const MemberId old_controller = t.controller;

  // Round 1: controller re-blinds its refreshed path, root included, and
  // hands the whole old tree to the joiner.
  const std::size_t ctl_exps = refresh_path(t, old_controller, controller_refresh, true);
  out.handoff = snapshot(t, t.epoch + 1, old_controller, true);

  // The joiner mounts the old tree one level down and takes the right leaf.
  std::map<NodeCoords, NodeData> shifted;
  for (const auto& [c, d] : t.nodes) shifted.emplace(NodeCoords{c.level + 1, c.index}, d);
  shifted.emplace(NodeCoords{0, 0}, NodeData{});
  shifted.emplace(NodeCoords{1, 1}, NodeData{blind(joiner_secret, t.params), joiner});
  t.nodes = std::move(shifted);
  const std::size_t joiner_exps = 1;  // its own blinded key; the broadcast needs nothing else
  GatewayView jv{joiner, joiner_secret, {joiner_secret.value()}, t.epoch, std::nullopt};
  t.views.emplace(joiner, std::move(jv));
  rebuild_leaf_index(t);
  t.controller = joiner;

  out.broadcast = snapshot(t, t.epoch + 1, joiner, false);
  const std::size_t parallel = deliver(t, t.epoch + 1);

  out.messages.push_back(Message{Message::Kind::unicast, 1, old_controller, joiner,
                                 out.handoff->key_units(), "tree-handoff"});
  out.messages.push_back(Message{Message::Kind::broadcast, 2, joiner, std::nullopt,
                                 out.broadcast->key_units(), "tree-join-rekey"});
  out.cost = CostLedger{2, out.handoff->key_units(), out.broadcast->key_units(),
                        ctl_exps + joiner_exps + parallel};
  return out;
}

TreeEventResult tree_leave(const KeyTree& tree, const MemberId& leaver,
                           const PrivateShare& controller_refresh) {
  if (!tree.leaves.count(leaver)) throw UnknownMemberError("no such leaf: " + leaver);
  if (leaver == tree.controller)
    throw RoleMismatchError("leaf is the controller; use tree_controller_leave");

  TreeEventResult out{tree, {}, {}, std::nullopt, std::nullopt, tree.views.at(leaver)};
  KeyTree& t = out.tree;

  // Snapshot the sponsor candidate's secrets before any mutation: the
  // leftmost leaf under the surviving sibling keeps every secret the
  // promotion preserves.
  const NodeCoords old_sibling = sibling_of(t.leaves.at(leaver));
  const MemberId sponsor_id = *t.nodes.at(leftmost_leaf(t.nodes, old_sibling)).owner;
  const std::vector<Bigint> sponsor_secrets = t.views.at(sponsor_id).path_secrets;

  NodeCoords promoted{};
  remove_leaf(t, leaver, promoted);

  if (t.leaves.size() < 2) {
    reset_degenerate(t);
    return out;
  }

  // Ancestors of the promotion point that are off the controller's key-path
  // hold secrets the controller never learns; the sponsor rederives them from
  // its retained path and forwards the re-blinded values.
  std::vector<NodeCoords> patched;
  std::size_t sponsor_exps = 0;
  {
    const NodeCoords ctl_leaf = t.leaves.at(t.controller);
    auto on_controller_path = [&](NodeCoords c) {
      NodeCoords a = ctl_leaf;
      while (a.level > c.level) a = parent_of(a);
      return a == c;
    };
    const NodeCoords sponsor_leaf = t.leaves.at(sponsor_id);
    // The promoted node sat one level deeper before the move, so the secret
    // index into the pre-event path is unchanged by the relabeling.
    std::size_t idx = static_cast<std::size_t>(sponsor_leaf.level - promoted.level);
    Bigint cur = sponsor_secrets.at(idx);
    NodeCoords pos = promoted;
    while (pos.level > 0) {
      NodeCoords up = parent_of(pos);
      if (on_controller_path(up)) break;
      cur = compute_parent_secret(t.nodes.at(sibling_of(pos)).blinded, cur, t.params).value();
      t.nodes.at(up).blinded = mod_exp(KeyValue(t.params.g(), t.params), cur, t.params);
      sponsor_exps += 2;
      patched.push_back(up);
      pos = up;
    }
  }

  const std::size_t ctl_exps = refresh_path(t, t.controller, controller_refresh, false);
  out.broadcast = snapshot(t, t.epoch + 1, t.controller, false);
  const std::size_t parallel = deliver(t, t.epoch + 1);

  int round = 1;
  if (!patched.empty()) {
    out.messages.push_back(Message{Message::Kind::unicast, round++, sponsor_id,
                                   t.controller, patched.size(), "tree-patch"});
  }
  out.messages.push_back(Message{Message::Kind::broadcast, round, t.controller, std::nullopt,
                                 out.broadcast->key_units(), "tree-leave-rekey"});
  out.cost = CostLedger{static_cast<std::uint64_t>(round), patched.size(),
                        out.broadcast->key_units(), sponsor_exps + ctl_exps + parallel};
  return out;
}

TreeEventResult tree_controller_leave(const KeyTree& tree,
                                      const PrivateShare& successor_refresh) {
  if (tree.leaves.size() < 2)
    throw ProtocolError("tree_controller_leave needs a surviving leaf");

  const MemberId leaver = tree.controller;
  TreeEventResult out{tree, {}, {}, std::nullopt, std::nullopt, tree.views.at(leaver)};
  KeyTree& t = out.tree;

  const NodeCoords old_sibling = sibling_of(t.leaves.at(leaver));
  const MemberId successor = *t.nodes.at(leftmost_leaf(t.nodes, old_sibling)).owner;

  NodeCoords promoted{};
  remove_leaf(t, leaver, promoted);
  t.controller = successor;

  if (t.leaves.size() < 2) {
    reset_degenerate(t);
    return out;
  }

  // Everything the removal invalidated lies on the successor's own key-path,
  // so its refresh re-blinds all of it; no patch round.
  const std::size_t ctl_exps = refresh_path(t, successor, successor_refresh, false);
  out.broadcast = snapshot(t, t.epoch + 1, successor, false);
  const std::size_t parallel = deliver(t, t.epoch + 1);

  out.messages.push_back(Message{Message::Kind::broadcast, 1, successor, std::nullopt,
                                 out.broadcast->key_units(), "tree-succession-rekey"});
  out.cost = CostLedger{1, 0, out.broadcast->key_units(), ctl_exps + parallel};
  return out;
}

KeyValue compute_outer_key(const GatewayView& view, const TreeBroadcast& bc,
                           const GroupParams& params) {
  if (bc.epoch != view.epoch + 1)
    throw StaleEpochError("broadcast is for epoch " + std::to_string(bc.epoch) +
                          ", gateway sits at " + std::to_string(view.epoch));
  std::map<NodeCoords, const TreeRecord*> by_coords;
  std::optional<NodeCoords> own;
  for (const auto& r : bc.records) {
    by_coords.emplace(r.coords, &r);
    if (r.owner && *r.owner == view.id) own = r.coords;
  }
  if (!own) throw UnknownMemberError("broadcast carries no leaf for " + view.id);
  NodeCoords c = *own;
  Bigint cur = view.leaf_secret.value();
  while (c.level > 0) {
    auto it = by_coords.find(sibling_of(c));
    if (it == by_coords.end() || !it->second->blinded)
      throw ProtocolError("missing co-path blinded key at " + coord_str(sibling_of(c)));
    cur = compute_parent_secret(*it->second->blinded, cur, params).value();
    c = parent_of(c);
  }
  return KeyValue(cur, params);
}

GatewayCensus census(const KeyTree& tree, const MemberId& member) {
  auto it = tree.views.find(member);
  if (it == tree.views.end()) throw UnknownMemberError("no such leaf: " + member);
  GatewayCensus c;
  c.keys = it->second.path_secrets.size();
  for (const auto& [coords, data] : tree.nodes) {
    if (coords.level > 0 && data.blinded) ++c.public_values;
  }
  return c;
}

std::vector<std::uint8_t> serialize_tree_broadcast(const TreeBroadcast& bc) {
  std::vector<std::uint8_t> out;
  wire::put_u64(out, bc.epoch);
  wire::put_string(out, bc.sender);
  wire::put_u32(out, static_cast<std::uint32_t>(bc.records.size()));
  for (const auto& r : bc.records) {
    wire::put_u32(out, static_cast<std::uint32_t>(r.coords.level));
    wire::put_u64(out, r.coords.index);
    out.push_back(r.blinded ? 1 : 0);
    if (r.blinded) wire::put_bigint(out, r.blinded->value());
    out.push_back(r.owner ? 1 : 0);
    if (r.owner) wire::put_string(out, *r.owner);
  }
  return out;
}

TreeBroadcast parse_tree_broadcast(const std::vector<std::uint8_t>& bytes,
                                   const GroupParams& params) {
  wire::Reader r(bytes);
  TreeBroadcast bc{r.u64(), r.string(), {}};
  const std::uint32_t n = r.u32();
  bc.records.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    TreeRecord rec;
    rec.coords.level = static_cast<int>(r.u32());
    rec.coords.index = r.u64();
    if (r.u8()) rec.blinded = KeyValue(r.bigint(), params);
    if (r.u8()) rec.owner = r.string();
    bc.records.push_back(std::move(rec));
  }
  if (!r.done()) throw ProtocolError("trailing bytes after tree record");
  return bc;
}

}  // namespace rbgka::tgdh
