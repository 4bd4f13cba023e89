// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shkd/adversary.hpp"
#include "shkd/bench.hpp"
#include "shkd/sim.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"

using namespace shkd;
namespace ts = testing_support;

namespace {

struct Result {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::vector<oracle::Int> ints(const FieldVector& v) {
  std::vector<oracle::Int> out;
  for (const auto& e : v) out.push_back(static_cast<oracle::Int>(e.value()));
  return out;
}

Result ac1_worked_instance() {
  Result r;
  Scenario sc = ts::worked_instance();
  const Execution e = execute(sc);
  const ProtocolTrace& tr = e.trace;
  const std::uint64_t expected_sk[] = {5, 3, 2};
  for (Session j = 1; j <= 3; ++j) {
    r.require(tr.truth.session_key(j).value() == expected_sk[j - 1], "SK_" + std::to_string(j));
  }
  const BroadcastMessage& b1 = tr.broadcasts.at(1);
  r.require(b1.z.value() == 6, "z_1");
  r.require(b1.revealed.size() == 1 && b1.revealed[0].dots.size() == 1 && b1.revealed[0].dots[0].value() == 2,
            "revealed dot in B_1");
  const PersonalSecret& u1 = tr.secrets.at(UserId{1});
  r.require(member_recover(u1, b1, tr.structure).key.value.value() == 5, "U1 recovery from B_1");
  r.require(member_self_heal(u1, tr.broadcasts.at(2), 1, tr.structure, tr.fn).key.value.value() == 5,
            "U1 heal from B_2");
  return r;
}

Result ac2_correctness(std::vector<RunReport>& keep) {
  Result r;
  std::mt19937_64 rng(0xA2);
  std::size_t unrecoverable = 0, healed = 0;
  for (int i = 0; i < 200; ++i) {
    const Scenario sc = ts::random_scenario(rng);
    RunReport report;
    try {
      report = run_scenario(sc);
    } catch (const std::logic_error& e) {
      r.require(false, "scenario " + std::to_string(i) + ": " + e.what());
      continue;
    }
    std::map<UserId, LifeCycle> cycles;
    for (const auto& s : report.storage) cycles[s.user] = s.cycle;
    for (const auto& o : report.outcomes) {
      if (o.outcome == Outcome::healed) ++healed;
      if (o.outcome != Outcome::unrecoverable) continue;
      ++unrecoverable;
      for (Session j = o.session; j <= cycles.at(o.user).end; ++j) {
        const auto d = report.delivered.find(j);
        r.require(d == report.delivered.end() || d->second.count(o.user) == 0,
                  "scenario " + std::to_string(i) + ": " + to_string(o.user) + " unrecoverable at " +
                      std::to_string(o.session) + " despite delivery at " + std::to_string(j));
      }
    }
    keep.push_back(std::move(report));
  }
  r.require(healed > 0, "no scenario exercised healing");
  if (r.ok) {
    r.detail = std::to_string(keep.size()) + " scenarios, " + std::to_string(healed) + " healed, " +
               std::to_string(unrecoverable) + " unrecoverable";
  }
  return r;
}

Result ac3_census() {
  Result r;
  std::mt19937_64 rng(0xA3);
  ts::RandomOptions opt;
  opt.moduli = {7, 11, 13};
  opt.max_threshold = 3;
  opt.max_sessions = 8;
  opt.max_users = 6;
  std::size_t censuses = 0;
  for (int i = 0; i < 50; ++i) {
    const Scenario sc = ts::random_scenario(rng, opt);
    const Execution e = execute(sc);
    const ProtocolTrace& tr = e.trace;
    const auto q = static_cast<oracle::Int>(sc.q);
    const std::vector<oracle::Int> target = ints(tr.structure.gm_vector());
    for (const auto& [j, b] : tr.broadcasts) {
      std::vector<Observation> obs;
      std::vector<std::vector<oracle::Int>> rows;
      std::vector<oracle::Int> values;
      for (const auto& rs : b.revealed) {
        const auto& phi = tr.structure.phi(rs.user);
        for (std::size_t k = 0; k < phi.size(); ++k) {
          obs.push_back({phi[k], rs.dots[k]});
          rows.push_back(ints(phi[k]));
          values.push_back(static_cast<oracle::Int>(rs.dots[k].value()));
        }
      }
      const auto counts = secrecy_census(tr.structure, obs);
      const auto expected = oracle::census(rows, values, target, q);
      ++censuses;
      r.require(counts == expected, "scenario " + std::to_string(i) + " B_" + std::to_string(j) + " census mismatch");
      r.require(census_uniform(counts), "scenario " + std::to_string(i) + " B_" + std::to_string(j) + " biased");
    }
    AttackOptions ao;
    ao.census_max_space = 13 * 13 * 13;
    const AttackReport rep = run_attack_suite(tr, kAllProperties, ao);
    for (const auto& v : rep.verdicts) {
      if (v.observed_authorized) continue;
      r.require(v.census_uniform.has_value(), "census skipped for an unauthorized coalition");
      if (v.census_uniform) {
        ++censuses;
        r.require(*v.census_uniform, "biased census for " + to_string(v.coalition));
      }
    }
  }
  if (r.ok) r.detail = std::to_string(censuses) + " censuses, all uniform";
  return r;
}

Result ac4_attacks() {
  Result r;
  std::mt19937_64 rng(0xA4);
  std::size_t verdicts = 0, collusion = 0, mutant_failures = 0;
  AttackOptions opt;
  opt.census_max_space = 0;  // secrecy is covered by the census criterion
  AttackOptions broken = opt;
  broken.prng_broken = true;
  std::vector<ProtocolTrace> traces;
  traces.push_back(execute(ts::worked_instance()).trace);
  for (int i = 0; i < 100; ++i) traces.push_back(execute(ts::random_scenario(rng)).trace);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const AttackReport rep = run_attack_suite(traces[i], kAllProperties, opt);
    verdicts += rep.verdicts.size();
    for (const auto& v : rep.verdicts) {
      if (v.property == Property::collusion) ++collusion;
      r.require(v.key_absent && v.privacy_ok, "trace " + std::to_string(i) + ": " + std::string(to_string(v.property)) +
                                                 " session " + std::to_string(v.session) + " via " + v.derivation);
    }
    const std::array<Property, 1> only{Property::collusion};
    const AttackReport mutant = run_attack_suite(traces[i], only, broken);
    mutant_failures += mutant.failures();
    if (i == 0) r.require(!mutant.all_pass(), "mutation did not break collusion on the worked instance");
  }
  r.require(collusion > 0, "no collusion experiment ran");
  r.require(mutant_failures > 0, "mutation went undetected");
  if (r.ok) {
    r.detail = std::to_string(verdicts) + " verdicts (" + std::to_string(collusion) + " collusion); mutation: " +
               std::to_string(mutant_failures) + " collusion failures";
  }
  return r;
}

Result ac5_reconciliation(const std::vector<RunReport>& reports) {
  Result r;
  std::size_t sessions = 0;
  for (const auto& report : reports) {
    try {
      const Reconciliation rec = reconcile(report);
      for (const auto& s : rec.sessions) {
        ++sessions;
        r.require(s.measured_bits == (s.t_j + 1) * report.element_bits, "bit formula");
        r.require(s.measured_multiplications <= 2 * (s.t_j * s.t_j + s.t_j), "multiplication bound");
      }
    } catch (const ReconciliationFailure& e) {
      r.require(false, e.what());
    }
  }
  r.require(sessions > 0, "no sessions");
  if (r.ok) r.detail = std::to_string(sessions) + " sessions";
  return r;
}

Result ac6_overhead() {
  Result r;
  const BenchParams p{100, 67, 10, 50, 51, 10};
  const std::string csv = overhead_csv(p);
  std::ifstream in(SHKD_GOLDEN_DIR "/overhead_default_t10.csv", std::ios::binary);
  std::ostringstream golden;
  golden << in.rdbuf();
  r.require(in.good() || in.eof(), "golden file unreadable");
  r.require(csv == golden.str(), "CSV differs from the golden file");
  auto has = [&](const std::string& row) { return csv.find(row) != std::string::npos; };
  r.require(has("Ours,communication,bits,(T_j+1)*w,100,67,10,50,51,10,77\n"), "Ours communication");
  r.require(has("Ours,computation,multiplications,2*(T_j^2+T_j),100,67,10,50,51,10,220\n"), "Ours computation");
  r.require(has("Blundo-2004,communication,bits,(2*t*j+j)*w,100,67,10,50,51,10,7350\n"), "Blundo communication");
  r.require(has("Hong-Kang-2005,communication,bits,(t*j+j-t-1)*w,100,67,10,50,51,10,3773\n"),
            "Hong-Kang communication");
  r.require(has("Staddon-2002,computation,multiplications,2*m*t^2+3*m*t-t,100,67,10,50,51,10,22990\n"),
            "Staddon computation");
  const OverheadRow ours = overhead_row(Scheme::ours, p);
  const OverheadRow dutta = overhead_row(Scheme::dutta, p);
  r.require(ours.communication_bits == dutta.communication_bits && ours.computation == dutta.computation,
            "Ours and Dutta-2008 differ");
  return r;
}

Result ac7_authorization() {
  Result r;
  std::size_t checked = 0;
  auto brute = [](const LinearAccessStructure& s, const UserSet& set) {
    if (set.empty()) return false;
    std::vector<std::vector<oracle::Int>> rows;
    for (UserId u : set) {
      for (const auto& v : s.phi(u)) rows.push_back(ints(v));
    }
    return oracle::in_span_bruteforce(rows, ints(s.gm_vector()), static_cast<oracle::Int>(s.field().modulus()));
  };
  auto sweep = [&](const LinearAccessStructure& s) {
    const UserSet members = s.users();
    const std::vector<UserId> all(members.begin(), members.end());
    for (std::uint32_t mask = 0; mask < (1U << all.size()); ++mask) {
      UserSet sub;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (mask >> i & 1U) sub.insert(all[i]);
      }
      ++checked;
      r.require(is_authorized(s, sub) == brute(s, sub), "disagreement on " + to_string(sub));
    }
  };
  for (std::uint64_t q : {7, 11}) {
    const PrimeField f(q);
    for (std::uint32_t n = 1; n <= 5; ++n) {
      std::map<UserId, std::uint64_t> xs;
      for (std::uint32_t i = 1; i <= n; ++i) xs[UserId{i}] = i;
      for (std::size_t t = 1; t <= n + 1; ++t) sweep(make_threshold(t, xs, f));
    }
    // Every split of up to five users into two to four parts.
    for (std::uint32_t n = 2; n <= 5; ++n) {
      std::vector<std::uint32_t> label(n, 0);
      const std::uint32_t max_parts = std::min<std::uint32_t>(n, 4);
      std::function<void(std::uint32_t, std::uint32_t)> assign = [&](std::uint32_t i, std::uint32_t used) {
        if (i == n) {
          if (used < 2) return;
          std::vector<UserSet> parts(used);
          std::vector<std::uint64_t> xs;
          for (std::uint32_t k = 0; k < n; ++k) parts[label[k]].insert(UserId{k + 1});
          for (std::uint32_t k = 0; k < used; ++k) xs.push_back(k);
          sweep(make_multipartite(parts, xs, f));
          return;
        }
        for (std::uint32_t l = 0; l <= std::min(used, max_parts - 1); ++l) {
          label[i] = l;
          assign(i + 1, std::max(used, l + 1));
        }
      };
      assign(0, 0);
    }
  }
  if (r.ok) r.detail = std::to_string(checked) + " subsets";
  return r;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  bool all = true;
  auto report = [&](const char* id, const char* name, double limit_s, const std::function<Result()>& fn) {
    const auto start = clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    if (limit_s > 0 && secs > limit_s) {
      r.ok = false;
      r.detail += (r.detail.empty() ? "" : "; ") + std::string("over the time limit");
    }
    all = all && r.ok;
    std::cout << id << ' ' << (r.ok ? "PASS" : "FAIL") << ' ' << name << " (" << secs << " s";
    if (limit_s > 0) std::cout << ", limit " << limit_s << " s";
    std::cout << ")";
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << std::endl;
  };

  std::vector<RunReport> reports;
  report("AC1", "worked-instance regression", 1, ac1_worked_instance);
  report("AC2", "correctness and self-healing", 60, [&] { return ac2_correctness(reports); });
  report("AC3", "perfect-secrecy census", 120, ac3_census);
  report("AC4", "attack suite and mutation", 60, ac4_attacks);
  report("AC5", "overhead formula reconciliation", 0, [&] { return ac5_reconciliation(reports); });
  report("AC6", "overhead table reproduction", 1, ac6_overhead);
  report("AC7", "exhaustive authorization oracle", 0, ac7_authorization);
  return all ? 0 : 1;
}
