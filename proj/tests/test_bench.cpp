#include <gtest/gtest.h>

#include <random>

#include "shkd/bench.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"

using namespace shkd;

namespace {

struct Expected {
  std::uint64_t storage, communication, computation;
};

// Same formulas evaluated term by term with sums instead of products.
Expected oracle_row(Scheme s, const oracle::OverheadOracle& p) {
  const auto w = p.w();
  auto times = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t acc = 0;
    for (std::uint64_t i = 0; i < b; ++i) acc += a;
    return acc;
  };
  const std::uint64_t live = p.m - p.j + 1;
  switch (s) {
    case Scheme::staddon:
      return {times(times(live, live), w), times(times(p.m, p.t * p.t) + times(2 * p.m, p.t) + p.m + p.t, w),
              times(2 * p.m, p.t * p.t) + times(3 * p.m, p.t) - p.t};
    case Scheme::liu:
      return {times(2 * live, w), times(times(p.m + p.j + 1, p.t) + p.m + 1, w),
              times(p.m, p.t) + p.t + times(2 * p.t, p.j) + p.j};
    case Scheme::blundo:
      return {times(live, w), times(times(2 * p.t, p.j) + p.j, w), times(2 * p.j, p.t * p.t + p.t)};
    case Scheme::hong_kang:
      return {times(live, w), times(times(p.t, p.j) + p.j - p.t - 1, w), times(2 * p.t, p.j) + p.j};
    case Scheme::dutta:
      return {times(live + 1, w), times(p.T + 1, w), times(2, p.T * p.T + p.T)};
    case Scheme::ours:
      return {times(p.k + 1, w), times(p.T + 1, w), times(2, p.T * p.T + p.T)};
  }
  return {};
}

}  // namespace

TEST(Bench, DefaultParametersMatchKnownValues) {
  const BenchParams p;
  EXPECT_EQ(p.w(), 7U);
  EXPECT_EQ(overhead_row(Scheme::ours, p).communication_bits, 77U);
  EXPECT_EQ(overhead_row(Scheme::ours, p).computation, 220U);
  EXPECT_EQ(overhead_row(Scheme::blundo, p).communication_bits, 7350U);
  EXPECT_EQ(overhead_row(Scheme::hong_kang, p).communication_bits, 3773U);
  EXPECT_EQ(overhead_row(Scheme::staddon, p).computation, 22990U);
  EXPECT_EQ(overhead_row(Scheme::staddon, p).storage_bits, 18207U);
  EXPECT_EQ(overhead_row(Scheme::liu, p).communication_bits, 11277U);
  EXPECT_EQ(overhead_row(Scheme::liu, p).computation, 2060U);
  EXPECT_EQ(overhead_row(Scheme::ours, p).storage_bits, 364U);
}

TEST(Bench, FormulasAgreeWithOracleOnRandomParameters) {
  std::mt19937_64 rng(31);
  const std::uint64_t primes[] = {5, 7, 11, 13, 67, 101, 257, 65537};
  for (int i = 0; i < 500; ++i) {
    BenchParams p;
    p.q = primes[rng() % std::size(primes)];
    p.m = 1 + rng() % 200;
    p.j = 1 + rng() % p.m;
    p.k = 1 + rng() % p.m;
    p.t = 1 + rng() % 30;
    p.T = rng() % 40;
    auto as_int = [](std::uint64_t v) { return static_cast<oracle::Int>(v); };
    const oracle::OverheadOracle o{as_int(p.m), as_int(p.q), as_int(p.t), as_int(p.j), as_int(p.k), as_int(p.T)};
    ASSERT_EQ(p.w(), static_cast<std::uint64_t>(o.w()));
    for (Scheme s : kAllSchemes) {
      const OverheadRow row = overhead_row(s, p);
      const Expected e = oracle_row(s, o);
      EXPECT_EQ(row.storage_bits, e.storage) << to_string(s);
      EXPECT_EQ(row.communication_bits, e.communication) << to_string(s);
      EXPECT_EQ(row.computation, e.computation) << to_string(s);
    }
  }
}

TEST(Bench, OursEqualsDuttaWhenLifeCycleCoversRemainingSessions) {
  for (std::uint64_t m = 1; m <= 40; ++m) {
    for (std::uint64_t j = 1; j <= m; ++j) {
      const BenchParams p{m, 67, 4, j, m - j + 1, 4};
      const OverheadRow ours = overhead_row(Scheme::ours, p);
      const OverheadRow dutta = overhead_row(Scheme::dutta, p);
      EXPECT_EQ(ours.storage_bits, dutta.storage_bits);
      EXPECT_EQ(ours.communication_bits, dutta.communication_bits);
      EXPECT_EQ(ours.computation, dutta.computation);
    }
  }
}

TEST(Bench, OursIsCheapestForSmallThresholds) {
  for (std::uint64_t t = 1; t <= 20; ++t) {
    const BenchParams p{100, 67, t, 50, 51, t};
    const OverheadRow ours = overhead_row(Scheme::ours, p);
    for (Scheme s : kAllSchemes) {
      const OverheadRow other = overhead_row(s, p);
      EXPECT_LE(ours.communication_bits, other.communication_bits) << to_string(s) << " t=" << t;
      EXPECT_LE(ours.computation, other.computation) << to_string(s) << " t=" << t;
    }
  }
}

TEST(Bench, RejectsBadParameters) {
  auto bad = [](auto mutate) {
    BenchParams p;
    mutate(p);
    EXPECT_THROW(overhead_csv(p), ConfigurationError);
  };
  bad([](BenchParams& p) { p.q = 9; });
  bad([](BenchParams& p) { p.q = 1; });
  bad([](BenchParams& p) { p.j = 101; });
  bad([](BenchParams& p) { p.k = 0; });
  bad([](BenchParams& p) { p.k = 101; });
  bad([](BenchParams& p) { p.t = 0; });
  bad([](BenchParams& p) { p.m = 0; });
  bad([](BenchParams& p) {
    p.m = std::uint64_t{1} << 40;
    p.j = 1;
  });
  EXPECT_THROW(scheme_from_int(6), ConfigurationError);
  EXPECT_EQ(scheme_from_int(5), Scheme::ours);
}

TEST(Bench, CsvLayout) {
  const std::string csv = overhead_csv(BenchParams{});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 19);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scheme,metric,unit,formula,m,q,t,j,k,T_j,value");
  EXPECT_NE(csv.find("Ours,communication,bits,(T_j+1)*w,100,67,10,50,51,10,77\n"), std::string::npos);
  const std::string fig = comparison_csv(10);
  EXPECT_EQ(std::count(fig.begin(), fig.end(), '\n'), 13);
  EXPECT_NE(fig.find("Ours,communication_bits,100,67,50,10,77\n"), std::string::npos);
  EXPECT_NE(fig.find("Staddon-2002,computation,100,67,50,10,22990\n"), std::string::npos);
}

TEST(Reconcile, WorkedInstance) {
  const RunReport r = run_scenario(testing_support::worked_instance());
  const Reconciliation rec = reconcile(r);
  ASSERT_EQ(rec.sessions.size(), 3U);
  for (const auto& s : rec.sessions) {
    EXPECT_EQ(s.formula_bits, (s.t_j + 1) * 3);
    EXPECT_EQ(s.formula_bits, s.measured_bits);
    EXPECT_LE(s.measured_multiplications, s.multiplication_bound);
  }
  const auto u1 = std::find_if(rec.storage.begin(), rec.storage.end(),
                               [](const StorageReconciliation& s) { return s.user == UserId{1}; });
  ASSERT_NE(u1, rec.storage.end());
  EXPECT_EQ(u1->k, 3U);
  EXPECT_EQ(u1->table_bits, 12U);
  EXPECT_EQ(u1->analysis_bits, 18U);
  EXPECT_EQ(u1->actual_elements, 6U);
  EXPECT_NE(storage_csv(rec).find("U1,3,12,18,6,18\n"), std::string::npos);
}

TEST(Reconcile, DetectsTamperedCounters) {
  RunReport r = run_scenario(testing_support::worked_instance());
  RunReport bits = r;
  bits.sessions[1].element_bits += 1;
  EXPECT_THROW(reconcile(bits), ReconciliationFailure);
  RunReport mults = r;
  mults.sessions[0].max_multiplications = 5;
  EXPECT_THROW(reconcile(mults), ReconciliationFailure);
}

TEST(Reconcile, HoldsOnRandomScenarios) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 40; ++i) {
    const RunReport r = run_scenario(testing_support::random_scenario(rng));
    EXPECT_NO_THROW(reconcile(r)) << i;
  }
}
