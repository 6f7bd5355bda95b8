#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbgka/bigint.hpp"
#include "rbgka/region.hpp"

// Line-oriented scenario files. Setup lines declare the initial membership
// and must precede every event line:
//
//   member ID [share=INT] [tree_share=INT] [processing=NUM] [memory=NUM] [battery=NUM]
//
// Event lines, one per line, '#' starts a comment:
//
//   join ID [subgroup=N|new] [share=INT] [refresh=INT] [tree_share=INT]
//           [tree_refresh=INT] [processing=NUM] [memory=NUM] [battery=NUM]
//   leave ID [refresh=INT]
//   controller_leave ID [refresh=INT]
//   gateway_leave ID [refresh=INT] [tree_refresh=INT] [tree_share=INT]
//   outer_controller_leave ID [tree_refresh=INT] [tree_share=INT]
//   send SRC to=DST payload=HEX
//
// Scripted integers pin the corresponding exponent; anything omitted is drawn
// from the run's seeded random source.
namespace rbgka::sim {

struct ScenarioParseError : std::runtime_error {
  int line;
  ScenarioParseError(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
};

struct SendEvent {
  MemberId source;
  MemberId destination;
  std::vector<std::uint8_t> payload;
};

struct ScenarioEvent {
  std::string kind;  // keyword as written, echoed into traces
  int line = 0;
  std::optional<region::Event> membership;
  std::optional<SendEvent> send;
};

struct Scenario {
  std::vector<region::NodeProfile> setup;  // in file order
  std::map<MemberId, Bigint> setup_shares;
  std::map<MemberId, Bigint> setup_tree_shares;
  std::vector<ScenarioEvent> events;
};

Scenario parse_scenario(const std::string& text);

}  // namespace rbgka::sim
