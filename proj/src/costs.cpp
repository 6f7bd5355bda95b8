#include "rbgka/costs.hpp"

#include "rbgka/errors.hpp"

namespace rbgka::sim {

namespace {

void require_at_least(std::uint64_t v, std::uint64_t floor, const char* name) {
  if (v < floor)
    throw ProtocolError(std::string(name) + " must be at least " + std::to_string(floor));
}

}  // namespace

CostPrediction predict_costs(PredictedEvent kind, std::uint64_t x, std::uint64_t y,
                             std::uint64_t h) {
  require_at_least(x, 1, "X");
  switch (kind) {
    case PredictedEvent::member_join:
      return {2, x + 1, x + 1, 2 * x + 1};
    case PredictedEvent::member_leave:
      return {1, 0, x - 1, x - 1};
    case PredictedEvent::controller_join:
      require_at_least(y, 1, "Y");
      require_at_least(h, 1, "H");
      return {2, x + 1, x + 2 * y + 3, 2 * x + 3 * h + 1};
    case PredictedEvent::controller_leave:
      require_at_least(y, 1, "Y");
      require_at_least(h, 1, "H");
      return {1, 0, x + 2 * y - 5, x + 3 * h - 1};
  }
  throw ProtocolError("unknown predicted event kind");
}

MemoryPrediction predict_memory(MemoryRole role, std::uint64_t x, std::uint64_t y,
                                std::uint64_t l) {
  require_at_least(x, 1, "X");
  switch (role) {
    case MemoryRole::member:
      return {2, static_cast<std::size_t>(x + 1)};
    case MemoryRole::controller:
      require_at_least(y, 1, "Y");
      return {static_cast<std::size_t>(2 + l + 1), static_cast<std::size_t>(x + 2 * y - 1)};
    case MemoryRole::gdh_member:
      return {2, static_cast<std::size_t>(x + 1)};
    case MemoryRole::tgdh_member:
      return {static_cast<std::size_t>(l + 1), static_cast<std::size_t>(2 * x - 2)};
  }
  throw ProtocolError("unknown memory role");
}

CostPrediction predict_baseline(BaselineProtocol proto, BaselineEvent ev, std::uint64_t n,
                                std::uint64_t h) {
  require_at_least(n, 2, "N");
  if (proto == BaselineProtocol::gdh) {
    if (ev == BaselineEvent::join) return {2, n + 1, n + 1, 2 * n + 1};
    return {1, 0, n - 1, n - 1};
  }
  require_at_least(h, 1, "H");
  if (ev == BaselineEvent::join) return {2, 0, 2 * n + 2, 3 * h};
  return {1, 0, 2 * n - 4, 3 * h};
}

CompareReport compare(const CostLedger& measured, const CostPrediction& predicted) {
  CompareReport report;
  auto field = [&](const char* name, std::uint64_t got, std::uint64_t want) {
    if (got == want) return;
    const std::int64_t d = static_cast<std::int64_t>(got) - static_cast<std::int64_t>(want);
    report.deltas.push_back(std::string(name) + ": " + (d > 0 ? "+" : "") + std::to_string(d));
  };
  field("rounds", measured.rounds, predicted.rounds);
  field("unicast", measured.unicast_units, predicted.unicast_units);
  field("broadcast", measured.broadcast_units, predicted.broadcast_units);
  field("serial", measured.serial_exps, predicted.serial_exps);
  return report;
}

}  // namespace rbgka::sim
