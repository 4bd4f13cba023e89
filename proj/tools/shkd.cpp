// shkd: simulate, attack and bench front end.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 the group manager
// could not continue (revocation or padding capacity), 4 a security property
// failed. Outputs are written atomically inside the --out location.

#include <CLI11.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "shkd/adversary.hpp"
#include "shkd/bench.hpp"
#include "shkd/config.hpp"
#include "shkd/sim.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kInvalid = 2, kSystemFailed = 3, kPropertyFailed = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_atomically(const fs::path& target, const std::string& content) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + target.string());
  }
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return fs::path(dir);
}

shkd::Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw shkd::ScenarioInvalid("cannot read scenario " + path);
  std::ostringstream text;
  text << in.rdbuf();
  shkd::Scenario sc = shkd::parse_scenario_text(text.str());
  for (const auto& o : overrides) shkd::apply_override(sc, o);
  shkd::validate(sc);
  return sc;
}

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::vector<std::string> overrides;
};

int simulate(const SimulateArgs& a) {
  const shkd::Scenario sc = load_scenario(a.scenario, a.overrides);
  const shkd::RunReport report = shkd::run_scenario(sc);
  const shkd::Reconciliation rec = shkd::reconcile(report);
  const fs::path dir = prepare_dir(a.out);
  write_atomically(dir / "run_report.csv", shkd::outcomes_csv(report));
  write_atomically(dir / "sessions.csv", shkd::summary_csv(report));
  write_atomically(dir / "reconciliation.csv", shkd::reconciliation_csv(rec));
  write_atomically(dir / "storage.csv", shkd::storage_csv(rec));
  write_atomically(dir / "summary.txt", shkd::summary_text(report));
  std::cout << shkd::summary_text(report);
  return report.failed_at ? kSystemFailed : kOk;
}

struct AttackArgs {
  std::string scenario;
  std::string out;
  std::string property = "all";
  std::vector<std::string> overrides;
  std::uint64_t census_max_space = 200'000;
  bool break_prng = false;
};

int attack(const AttackArgs& a) {
  const shkd::Scenario sc = load_scenario(a.scenario, a.overrides);
  const shkd::Execution run = shkd::execute(sc);
  std::vector<shkd::Property> props;
  if (a.property == "all") {
    props.assign(shkd::kAllProperties.begin(), shkd::kAllProperties.end());
  } else {
    for (shkd::Property p : shkd::kAllProperties) {
      if (shkd::to_string(p) == a.property) props.push_back(p);
    }
  }
  shkd::AttackOptions options;
  options.prng_broken = a.break_prng;
  options.census_max_space = a.census_max_space;
  const shkd::AttackReport report = shkd::run_attack_suite(run.trace, props, options);
  const fs::path dir = prepare_dir(a.out);
  write_atomically(dir / "verdicts.csv", shkd::verdicts_csv(report));
  write_atomically(dir / "verdicts.txt", shkd::verdicts_text(report));
  std::cout << shkd::verdicts_text(report);
  if (!report.all_pass()) return kPropertyFailed;
  return run.report.failed_at ? kSystemFailed : kOk;
}

struct BenchArgs {
  shkd::BenchParams params;
  bool k_given = false;
  bool T_given = false;
  std::string out;
  std::string comparison;
};

int bench(BenchArgs a) {
  if (!a.k_given) a.params.k = a.params.j <= a.params.m ? a.params.m - a.params.j + 1 : 1;
  if (!a.T_given) a.params.T = a.params.t;
  const std::string table = shkd::overhead_csv(a.params);
  std::string comparison;
  if (!a.comparison.empty()) comparison = shkd::comparison_csv(a.params.t, a.params.q, a.params.m, a.params.j);
  write_atomically(a.out, table);
  if (!a.comparison.empty()) write_atomically(a.comparison, comparison);
  std::cout << table;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-healing group key distribution: simulator, attack harness and overhead bench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shkd 1.0.0");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario and write per-user outcomes");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_option("--override", sim.overrides, "Seed override, e.g. seed.loss=7")->take_all();

  AttackArgs atk;
  auto* atk_cmd = app.add_subcommand("attack", "Run the coalition attack suite against a scenario");
  atk_cmd->add_option("--scenario", atk.scenario, "Scenario JSON file")->required();
  atk_cmd->add_option("--out", atk.out, "Output directory")->required();
  atk_cmd->add_option("--property", atk.property, "Property to check")
      ->check(CLI::IsMember({"forward", "backward", "collusion", "revocation", "all"}));
  atk_cmd->add_option("--override", atk.overrides, "Seed override, e.g. seed.beta=3")->take_all();
  atk_cmd->add_option("--census-max-space", atk.census_max_space, "Largest q^l enumerated by the secrecy census");
  atk_cmd->add_flag("--assume-broken-prng", atk.break_prng)->group("");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Evaluate the overhead formulas");
  bench_cmd->add_option("--m", bn.params.m, "Number of sessions")->capture_default_str();
  bench_cmd->add_option("--q", bn.params.q, "Field modulus")->capture_default_str();
  bench_cmd->add_option("--t", bn.params.t, "Threshold")->required();
  bench_cmd->add_option("--j", bn.params.j, "Session index")->capture_default_str();
  bench_cmd->add_option("--k", bn.params.k, "Life-cycle length (default m-j+1)")
      ->each([&](const std::string&) { bn.k_given = true; });
  bench_cmd->add_option("--T", bn.params.T, "Revealed shares T_j (default t)")
      ->each([&](const std::string&) { bn.T_given = true; });
  bench_cmd->add_option("--out", bn.out, "CSV output file")->required();
  bench_cmd->add_option("--comparison", bn.comparison, "Also write the per-scheme comparison CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sim_cmd) return simulate(sim);
    if (*atk_cmd) return attack(atk);
    if (*bench_cmd) return bench(bn);
  } catch (const shkd::ScenarioInvalid& e) {
    std::cerr << "shkd: " << e.what() << '\n';
    return kInvalid;
  } catch (const shkd::ConfigurationError& e) {
    std::cerr << "shkd: " << e.what() << '\n';
    return kInvalid;
  } catch (const IoError& e) {
    std::cerr << "shkd: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "shkd: internal error: " << e.what() << '\n';
    return kIo;
  }
  return kInvalid;
}
