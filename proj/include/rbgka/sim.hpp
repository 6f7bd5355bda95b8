#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbgka/costs.hpp"
#include "rbgka/region.hpp"
#include "rbgka/scenario.hpp"

namespace rbgka::sim {

// Flat stand-in for the wire. Every event's messages pass through it, and the
// totals independently cross-check the per-event ledgers.
struct SimNetwork {
  std::uint64_t unicast_messages = 0;
  std::uint64_t broadcast_messages = 0;
  std::uint64_t unicast_units = 0;
  std::uint64_t broadcast_units = 0;
  void deliver(const std::vector<Message>& batch);
};

struct EventRecord {
  std::string kind;  // "form", the event keyword, or "send"
  std::string who;
  int line = 0;
  CostLedger cost;
  region::RekeyPlan plan;
  std::map<region::SubgroupId, KeyValue> kr;  // keys live after the event
  std::optional<KeyValue> kg;
};

struct SimResult {
  region::RegionTopology topology;
  std::vector<EventRecord> records;  // formation first when the setup is non-empty
  std::string trace;  // one line per record: index, kind, who, key digests, ledger
  std::string csv;    // header "event,rounds,unicast_units,broadcast_units,serial_exps"
  SimNetwork network;
};

// Deterministic: equal (scenario, params, config, seed) give byte-identical
// trace and csv. Scenario mistakes surface as the protocol errors they cause;
// broken invariants abort with InvariantViolation.
SimResult run_scenario(const Scenario& sc, const GroupParams& params,
                       const region::Config& config, std::uint64_t seed);

}  // namespace rbgka::sim
