#include "rbgka/sim.hpp"

#include <sstream>

#include "rbgka/errors.hpp"

namespace rbgka::sim {

void SimNetwork::deliver(const std::vector<Message>& batch) {
  for (const auto& m : batch) {
    if (m.kind == Message::Kind::unicast) {
      ++unicast_messages;
      unicast_units += m.key_units;
    } else {
      ++broadcast_messages;
      broadcast_units += m.key_units;
    }
  }
}

SimResult run_scenario(const Scenario& sc, const GroupParams& params,
                       const region::Config& config, std::uint64_t seed) {
  DeterministicRng rng(seed);
  SimResult out{
      region::RegionTopology{params, config, {}, tgdh::KeyTree{params, {}, {}, {}, {}, 0,
                                                               std::nullopt}, {}, 0},
      {}, "", "", {}};

  std::ostringstream trace;
  std::ostringstream csv;
  csv << "event,rounds,unicast_units,broadcast_units,serial_exps\n";
  std::size_t index = 0;

  auto snapshot = [&](EventRecord& r) {
    for (const auto& [sid, sub] : out.topology.subgroups)
      if (sub.state.key) r.kr.emplace(sid, *sub.state.key);
    if (out.topology.tree.key) r.kg = *out.topology.tree.key;
  };

  auto emit = [&](EventRecord r) {
    trace << index << ' ' << r.kind << ' ' << (r.who.empty() ? "-" : r.who);
    if (r.kr.empty()) {
      trace << " kr=-";
    } else {
      trace << " kr=";
      bool first = true;
      for (const auto& [sid, k] : r.kr) {
        if (!first) trace << ',';
        first = false;
        trace << sid << ':' << key_digest(k);
      }
    }
    trace << " kg=" << (r.kg ? key_digest(*r.kg) : "-");
    trace << " rounds=" << r.cost.rounds << " unicast=" << r.cost.unicast_units
          << " broadcast=" << r.cost.broadcast_units << " serial=" << r.cost.serial_exps
          << '\n';
    csv << r.kind << ',' << r.cost.rounds << ',' << r.cost.unicast_units << ','
        << r.cost.broadcast_units << ',' << r.cost.serial_exps << '\n';
    out.records.push_back(std::move(r));
    ++index;
  };

  if (!sc.setup.empty()) {
    out.topology = region::form_subgroups(sc.setup, config, params, rng, sc.setup_shares,
                                          sc.setup_tree_shares);
    EventRecord r;
    r.kind = "form";
    snapshot(r);
    emit(std::move(r));
  }

  for (const auto& ev : sc.events) {
    EventRecord r;
    r.kind = ev.kind;
    r.line = ev.line;
    if (ev.membership) {
      auto o = region::handle_event(out.topology, *ev.membership, rng);
      out.topology = std::move(o.topology);
      out.network.deliver(o.messages);
      CostLedger tallied = tally_messages(o.messages);
      if (tallied.rounds != o.cost.rounds || tallied.unicast_units != o.cost.unicast_units ||
          tallied.broadcast_units != o.cost.broadcast_units)
        throw InvariantViolation("message tally diverges from the event ledger");
      r.cost = o.cost;
      r.plan = o.plan;
      r.who = ev.membership->member;
    } else {
      auto res = region::route_message(out.topology, ev.send->source, ev.send->destination,
                                       ev.send->payload);
      if (res.delivered != ev.send->payload)
        throw InvariantViolation("routed payload corrupted in transit");
      r.who = ev.send->source + "->" + ev.send->destination;
    }
    snapshot(r);
    emit(std::move(r));
  }

  out.trace = trace.str();
  out.csv = csv.str();
  return out;
}

}  // namespace rbgka::sim
