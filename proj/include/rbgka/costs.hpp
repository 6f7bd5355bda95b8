#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbgka/message.hpp"

// Closed-form cost and memory predictors for the composite protocol and for
// the two flat reference protocols it is compared against. Symbols: X members
// per subgroup, Y subgroups (= gateways), H outer tree height, L a gateway
// leaf's level, N flat group size.
namespace rbgka::sim {

using CostPrediction = CostLedger;

enum class PredictedEvent { member_join, member_leave, controller_join, controller_leave };

CostPrediction predict_costs(PredictedEvent kind, std::uint64_t x, std::uint64_t y,
                             std::uint64_t h);

struct MemoryPrediction {
  std::size_t keys = 0;
  std::size_t public_values = 0;
  friend bool operator==(const MemoryPrediction&, const MemoryPrediction&) = default;
};

// member: 2 keys, X+1 public values. controller (gateway): 2+M keys with
// M = L+1 path secrets, X+2Y-1 public values. The baseline roles read X as
// the flat group size and L as the member's tree level.
enum class MemoryRole { member, controller, gdh_member, tgdh_member };

MemoryPrediction predict_memory(MemoryRole role, std::uint64_t x, std::uint64_t y,
                                std::uint64_t l);

enum class BaselineProtocol { gdh, tgdh };
enum class BaselineEvent { join, leave };

CostPrediction predict_baseline(BaselineProtocol proto, BaselineEvent ev, std::uint64_t n,
                                std::uint64_t h);

// Field-by-field deltas, measured minus predicted, e.g. "broadcast: +1".
// Empty means exact agreement.
struct CompareReport {
  std::vector<std::string> deltas;
  bool exact() const { return deltas.empty(); }
};

CompareReport compare(const CostLedger& measured, const CostPrediction& predicted);

}  // namespace rbgka::sim
