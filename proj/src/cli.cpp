#include "rbgka/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rbgka/costs.hpp"
#include "rbgka/errors.hpp"
#include "rbgka/scenario.hpp"
#include "rbgka/sim.hpp"

namespace rbgka::cli {

namespace {

constexpr const char* kCostHeader = "event,rounds,unicast_units,broadcast_units,serial_exps";
constexpr const char* kSweepHeader =
    "protocol,n,x,keys,public_values,join_rounds,join_unicast,join_broadcast,join_serial,"
    "leave_rounds,leave_unicast,leave_broadcast,leave_serial,public_ratio_vs_gdh";

std::uint64_t ceil_log2(std::uint64_t n) {
  std::uint64_t h = 0;
  std::uint64_t reach = 1;
  while (reach < n) {
    reach *= 2;
    ++h;
  }
  return h;
}

bool write_file(const std::filesystem::path& path, const std::string& content,
                std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.flush();
  if (!f) {
    err << "cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

// metrics rendered as labeled lines instead of CSV
std::string costs_as_text(const std::vector<sim::EventRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records)
    out << "event=" << r.kind << " rounds=" << r.cost.rounds
        << " unicast_units=" << r.cost.unicast_units
        << " broadcast_units=" << r.cost.broadcast_units
        << " serial_exps=" << r.cost.serial_exps << "\n";
  return out.str();
}

struct RunFlags {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string g = "5";
  std::string p = "32713";
  std::size_t max_subgroup = 100;
  std::string out_dir = ".";
  std::string format = "csv";
};

int do_run(const RunFlags& f, std::ostream& out, std::ostream& err) {
  std::ifstream file(f.scenario, std::ios::binary);
  if (!file) {
    err << "cannot read scenario file: " << f.scenario << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << file.rdbuf();

  GroupParams params = GroupParams::demo_default();
  try {
    params = GroupParams(Bigint(f.g), Bigint(f.p));
  } catch (const std::exception& e) {
    err << "bad group parameters: " << e.what() << "\n";
    return 1;
  }
  if (f.max_subgroup < 2) {
    err << "--max-subgroup must be at least 2\n";
    return 1;
  }

  sim::Scenario sc;
  try {
    sc = sim::parse_scenario(buf.str());
  } catch (const sim::ScenarioParseError& e) {
    err << f.scenario << ": " << e.what() << "\n";
    return 2;
  }

  sim::SimResult result{
      region::RegionTopology{params, region::Config{f.max_subgroup}, {},
                             tgdh::KeyTree{params, {}, {}, {}, {}, 0, std::nullopt}, {}, 0},
      {}, "", "", {}};
  try {
    result = sim::run_scenario(sc, params, region::Config{f.max_subgroup}, f.seed);
  } catch (const ProtocolError& e) {
    err << "run aborted: " << e.what() << "\n";
    return 3;
  }

  std::filesystem::path dir(f.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto trace_path = dir / "trace.txt";
  if (!write_file(trace_path, result.trace, err)) return 1;
  const auto costs_path = dir / (f.format == "csv" ? "costs.csv" : "costs.txt");
  const std::string costs =
      f.format == "csv" ? result.csv : costs_as_text(result.records);
  if (!write_file(costs_path, costs, err)) return 1;

  out << "wrote " << trace_path.string() << " and " << costs_path.string() << " ("
      << result.records.size() << " records)\n";
  return 0;
}

struct SweepFlags {
  std::string protocols = "rbgka,gdh,tgdh";
  std::uint64_t n_min = 64;
  std::uint64_t n_max = 1024;
  std::uint64_t x = 100;
  std::string out_path = "sweep.csv";
};

int do_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  if (f.n_min < 2 || f.n_max < f.n_min || f.x < 1) {
    err << "invalid sweep range: need 2 <= n-min <= n-max and x >= 1\n";
    return 1;
  }
  std::vector<std::string> protos;
  {
    std::stringstream ss(f.protocols);
    std::string p;
    while (std::getline(ss, p, ',')) {
      if (p != "rbgka" && p != "gdh" && p != "tgdh") {
        err << "unknown protocol '" << p << "'\n";
        return 1;
      }
      protos.push_back(p);
    }
  }

  std::ostringstream csv;
  csv << kSweepHeader << "\n";
  auto cost_cells = [&](const CostLedger& c) {
    csv << ',' << c.rounds << ',' << c.unicast_units << ',' << c.broadcast_units << ','
        << c.serial_exps;
  };
  for (std::uint64_t n = f.n_min; n <= f.n_max; n *= 2) {
    for (const auto& proto : protos) {
      const double gdh_public = static_cast<double>(n + 1);
      if (proto == "rbgka") {
        auto mem = sim::predict_memory(sim::MemoryRole::member, f.x, 1, 0);
        csv << "rbgka," << n << ',' << f.x << ',' << mem.keys << ',' << mem.public_values;
        cost_cells(sim::predict_costs(sim::PredictedEvent::member_join, f.x, 1, 1));
        cost_cells(sim::predict_costs(sim::PredictedEvent::member_leave, f.x, 1, 1));
        csv << ',' << std::fixed << std::setprecision(6)
            << (static_cast<double>(mem.public_values) / gdh_public) << "\n";
      } else if (proto == "gdh") {
        auto mem = sim::predict_memory(sim::MemoryRole::gdh_member, n, 1, 0);
        csv << "gdh," << n << ",," << mem.keys << ',' << mem.public_values;
        cost_cells(sim::predict_baseline(sim::BaselineProtocol::gdh, sim::BaselineEvent::join,
                                         n, 1));
        cost_cells(sim::predict_baseline(sim::BaselineProtocol::gdh, sim::BaselineEvent::leave,
                                         n, 1));
        csv << ',' << std::fixed << std::setprecision(6) << 1.0 << "\n";
      } else {
        const std::uint64_t h = ceil_log2(n);
        auto mem = sim::predict_memory(sim::MemoryRole::tgdh_member, n, 1, h);
        csv << "tgdh," << n << ",," << mem.keys << ',' << mem.public_values;
        cost_cells(sim::predict_baseline(sim::BaselineProtocol::tgdh, sim::BaselineEvent::join,
                                         n, h));
        cost_cells(sim::predict_baseline(sim::BaselineProtocol::tgdh,
                                         sim::BaselineEvent::leave, n, h));
        csv << ',' << std::fixed << std::setprecision(6)
            << (static_cast<double>(mem.public_values) / gdh_public) << "\n";
      }
    }
    if (n > f.n_max / 2) break;  // avoid overflow on the doubling step
  }

  std::filesystem::path path(f.out_path);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  if (!write_file(path, csv.str(), err)) return 1;
  out << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group key agreement simulator: subgroup agreement under a shared outer tree"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand(
      "run",
      std::string("Replay a scenario file deterministically. Writes trace.txt (one line per "
                  "event: index, kind, who, key digests, ledger) and costs in the chosen "
                  "format; the csv header is \"") +
          kCostHeader + "\".");
  run->add_option("--scenario", rf.scenario, "scenario file path")->required();
  run->add_option("--seed", rf.seed, "seed for all unscripted key material");
  run->add_option("--g", rf.g, "group generator (default 5)");
  run->add_option("--p", rf.p, "prime modulus (default 32713)");
  run->add_option("--max-subgroup", rf.max_subgroup, "subgroup size cap (default 100)");
  run->add_option("--out", rf.out_dir, "output directory (default .)");
  run->add_option("--format", rf.format, "costs format: csv or text")
      ->check(CLI::IsMember({"csv", "text"}));

  SweepFlags sf;
  auto* sweep = app.add_subcommand(
      "sweep",
      std::string("Tabulate closed-form member costs per protocol while N doubles from "
                  "n-min to n-max. Columns: \"") +
          kSweepHeader + "\".");
  sweep->add_option("--protocols", sf.protocols, "comma list from {rbgka,gdh,tgdh}");
  sweep->add_option("--n-min", sf.n_min, "smallest group size (default 64)");
  sweep->add_option("--n-max", sf.n_max, "largest group size (default 1024)");
  sweep->add_option("--x", sf.x, "subgroup size for the composite rows (default 100)");
  sweep->add_option("--out", sf.out_path, "output csv path (default sweep.csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed()) return do_run(rf, out, err);
  return do_sweep(sf, out, err);
}

}  // namespace rbgka::cli
