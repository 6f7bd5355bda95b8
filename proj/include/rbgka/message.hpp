#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbgka {

using MemberId = std::string;

// One transmission in a rekey flow. Payload sizes are counted in key units
// (group elements carried), which is what the cost model tracks.
struct Message {
  enum class Kind { unicast, broadcast };
  Kind kind = Kind::broadcast;
  int round = 1;  // 1-based round index within the event
  MemberId sender;
  std::optional<MemberId> receiver;  // unicast only
  std::size_t key_units = 0;
  std::string label;
};

// Measured cost of one membership event.
struct CostLedger {
  std::uint64_t rounds = 0;
  std::uint64_t unicast_units = 0;
  std::uint64_t broadcast_units = 0;
  // longest chain of dependent modular exponentiations; per-member work that
  // can proceed in parallel counts once
  std::uint64_t serial_exps = 0;

  friend bool operator==(const CostLedger&, const CostLedger&) = default;

  // sequential composition of two protocol stages
  CostLedger& operator+=(const CostLedger& o) {
    rounds += o.rounds;
    unicast_units += o.unicast_units;
    broadcast_units += o.broadcast_units;
    serial_exps += o.serial_exps;
    return *this;
  }
};

// derive the unit totals a message list implies; used to cross-check ledgers
CostLedger tally_messages(const std::vector<Message>& msgs);

}  // namespace rbgka
