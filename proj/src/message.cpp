#include "rbgka/message.hpp"

#include <algorithm>

namespace rbgka {

CostLedger tally_messages(const std::vector<Message>& msgs) {
  CostLedger c;
  for (const Message& m : msgs) {
    c.rounds = std::max<std::uint64_t>(c.rounds, static_cast<std::uint64_t>(m.round));
    if (m.kind == Message::Kind::unicast) {
      c.unicast_units += m.key_units;
    } else {
      c.broadcast_units += m.key_units;
    }
  }
  return c;
}

}  // namespace rbgka
