#pragma once

// Overhead formulas for six self-healing key distribution schemes, the
// per-t comparison series, and reconciliation of simulator counters against
// the formulas of this scheme. w = ceil(log2 q) bits per field element.

#include <array>
#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shkd/error.hpp"
#include "shkd/gf.hpp"
#include "shkd/sim.hpp"

namespace shkd {

enum class Scheme { staddon, liu, blundo, hong_kang, dutta, ours };

inline constexpr std::array<Scheme, 6> kAllSchemes{Scheme::staddon, Scheme::liu,   Scheme::blundo,
                                                   Scheme::hong_kang, Scheme::dutta, Scheme::ours};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::staddon: return "Staddon-2002";
    case Scheme::liu: return "Liu-2003";
    case Scheme::blundo: return "Blundo-2004";
    case Scheme::hong_kang: return "Hong-Kang-2005";
    case Scheme::dutta: return "Dutta-2008";
    case Scheme::ours: return "Ours";
  }
  throw ConfigurationError("unknown scheme");
}

inline Scheme scheme_from_int(int v) {
  if (v < 0 || v >= static_cast<int>(kAllSchemes.size())) throw ConfigurationError("unknown scheme " + std::to_string(v));
  return kAllSchemes[static_cast<std::size_t>(v)];
}

struct BenchParams {
  std::uint64_t m = 100;
  std::uint64_t q = 67;
  std::uint64_t t = 10;
  std::uint64_t j = 50;
  /// Life-cycle length k_i.
  std::uint64_t k = 51;
  /// Revealed-share count T_j.
  std::uint64_t T = 10;

  std::uint64_t w() const { return static_cast<std::uint64_t>(std::bit_width(q - 1)); }
};

/// Throws ConfigurationError when the parameters are out of range.
inline void check_params(const BenchParams& p) {
  if (p.m < 1 || p.t < 1 || p.j < 1 || p.k < 1) throw ConfigurationError("m, t, j and k must be positive");
  if (p.j > p.m) throw ConfigurationError("j must not exceed m");
  if (p.k > p.m) throw ConfigurationError("k must not exceed m");
  if (!detail::is_prime(p.q)) throw ConfigurationError("q = " + std::to_string(p.q) + " is not prime");
}

struct OverheadRow {
  Scheme scheme = Scheme::ours;
  BenchParams params;
  std::uint64_t storage_bits = 0;
  std::uint64_t communication_bits = 0;
  std::uint64_t computation = 0;
};

namespace detail {

/// Unsigned arithmetic that throws instead of wrapping.
struct Checked {
  std::uint64_t v;

  friend Checked operator+(Checked a, Checked b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a.v, b.v, &r)) throw ConfigurationError("formula overflows 64 bits");
    return {r};
  }
  friend Checked operator-(Checked a, Checked b) {
    if (b.v > a.v) throw ConfigurationError("formula is negative at these parameters");
    return {a.v - b.v};
  }
  friend Checked operator*(Checked a, Checked b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a.v, b.v, &r)) throw ConfigurationError("formula overflows 64 bits");
    return {r};
  }
};

}  // namespace detail

struct FormulaText {
  std::string_view storage;
  std::string_view communication;
  std::string_view computation;
};

inline FormulaText formula_text(Scheme s) {
  switch (s) {
    case Scheme::staddon: return {"(m-j+1)^2*w", "(m*t^2+2*m*t+m+t)*w", "2*m*t^2+3*m*t-t"};
    case Scheme::liu: return {"2*(m-j+1)*w", "((m+j+1)*t+(m+1))*w", "m*t+t+2*t*j+j"};
    case Scheme::blundo: return {"(m-j+1)*w", "(2*t*j+j)*w", "2*j*(t^2+t)"};
    case Scheme::hong_kang: return {"(m-j+1)*w", "(t*j+j-t-1)*w", "2*t*j+j"};
    case Scheme::dutta: return {"(m-j+2)*w", "(T_j+1)*w", "2*(T_j^2+T_j)"};
    case Scheme::ours: return {"(k+1)*w", "(T_j+1)*w", "2*(T_j^2+T_j)"};
  }
  throw ConfigurationError("unknown scheme");
}

inline OverheadRow overhead_row(Scheme s, const BenchParams& p) {
  check_params(p);
  using C = detail::Checked;
  const C m{p.m}, t{p.t}, j{p.j}, k{p.k}, T{p.T}, w{p.w()}, one{1}, two{2}, three{3};
  C storage{0}, comm{0}, comp{0};
  switch (s) {
    case Scheme::staddon:
      storage = (m - j + one) * (m - j + one) * w;
      comm = (m * t * t + two * m * t + m + t) * w;
      comp = two * m * t * t + three * m * t - t;
      break;
    case Scheme::liu:
      storage = two * (m - j + one) * w;
      comm = ((m + j + one) * t + (m + one)) * w;
      comp = m * t + t + two * t * j + j;
      break;
    case Scheme::blundo:
      storage = (m - j + one) * w;
      comm = (two * t * j + j) * w;
      comp = two * j * (t * t + t);
      break;
    case Scheme::hong_kang:
      storage = (m - j + one) * w;
      comm = (t * j + j - t - one) * w;
      comp = two * t * j + j;
      break;
    case Scheme::dutta:
      storage = (m - j + two) * w;
      comm = (T + one) * w;
      comp = two * (T * T + T);
      break;
    case Scheme::ours:
      storage = (k + one) * w;
      comm = (T + one) * w;
      comp = two * (T * T + T);
      break;
  }
  return {s, p, storage.v, comm.v, comp.v};
}

inline std::string overhead_csv(const BenchParams& p) {
  std::ostringstream out;
  out << "scheme,metric,unit,formula,m,q,t,j,k,T_j,value\n";
  for (Scheme s : kAllSchemes) {
    const OverheadRow row = overhead_row(s, p);
    const FormulaText f = formula_text(s);
    auto line = [&](std::string_view metric, std::string_view unit, std::string_view formula, std::uint64_t v) {
      out << to_string(s) << ',' << metric << ',' << unit << ',' << formula << ',' << p.m << ',' << p.q << ','
          << p.t << ',' << p.j << ',' << p.k << ',' << p.T << ',' << v << '\n';
    };
    line("storage", "bits", f.storage, row.storage_bits);
    line("communication", "bits", f.communication, row.communication_bits);
    line("computation", "multiplications", f.computation, row.computation);
  }
  return out.str();
}

/// Communication and computation per scheme as t varies, at m = 100,
/// q = 67, j = 50 unless overridden, with T_j = t.
inline std::string comparison_csv(std::uint64_t t, std::uint64_t q = 67, std::uint64_t m = 100,
                                  std::uint64_t j = 50) {
  const BenchParams p{m, q, t, j, m - j + 1, t};
  std::ostringstream out;
  out << "scheme,metric,m,q,j,t,value\n";
  for (bool comm : {true, false}) {
    for (Scheme s : kAllSchemes) {
      const OverheadRow row = overhead_row(s, p);
      out << to_string(s) << ',' << (comm ? "communication_bits" : "computation") << ',' << m << ',' << q << ','
          << j << ',' << t << ',' << (comm ? row.communication_bits : row.computation) << '\n';
    }
  }
  return out.str();
}

struct SessionReconciliation {
  Session session = 0;
  std::uint64_t t_j = 0;
  std::uint64_t formula_bits = 0;
  std::uint64_t measured_bits = 0;
  std::uint64_t multiplication_bound = 0;
  std::uint64_t measured_multiplications = 0;
};

/// Storage for one member under the three available formulas. Only
/// `actual_elements` is what the implementation stores.
struct StorageReconciliation {
  UserId user;
  std::uint64_t k = 0;
  std::uint64_t table_bits = 0;
  std::uint64_t analysis_bits = 0;
  std::uint64_t actual_elements = 0;
  std::uint64_t actual_bits = 0;
};

struct Reconciliation {
  std::vector<SessionReconciliation> sessions;
  std::vector<StorageReconciliation> storage;
};

/// Compares the simulator's counters with the formulas. Throws
/// ReconciliationFailure if element bits differ from (t_j+1)·w or a session's
/// multiplications exceed 2(t_j²+t_j). Storage is reported, never asserted.
inline Reconciliation reconcile(const RunReport& report) {
  const std::uint64_t w = report.element_bits;
  Reconciliation out;
  for (const auto& s : report.sessions) {
    SessionReconciliation r{s.session, s.t_j, (std::uint64_t{s.t_j} + 1) * w, s.element_bits,
                            2 * (std::uint64_t{s.t_j} * s.t_j + s.t_j), s.max_multiplications};
    if (r.formula_bits != r.measured_bits) {
      throw ReconciliationFailure("session " + std::to_string(s.session) + ": measured " +
                                  std::to_string(r.measured_bits) + " element bits, formula " +
                                  std::to_string(r.formula_bits));
    }
    if (r.measured_multiplications > r.multiplication_bound) {
      throw ReconciliationFailure("session " + std::to_string(s.session) + ": " +
                                  std::to_string(r.measured_multiplications) + " multiplications exceed bound " +
                                  std::to_string(r.multiplication_bound));
    }
    out.sessions.push_back(r);
  }
  for (const auto& st : report.storage) {
    const std::uint64_t k = st.cycle.length();
    const std::uint64_t t = report.threshold;
    out.storage.push_back({st.user, k, (k + 1) * w, (k - 1 + t + 2) * w, st.elements, st.elements * w});
  }
  return out;
}

inline std::string reconciliation_csv(const Reconciliation& r) {
  std::ostringstream out;
  out << "session,t_j,formula_bits,measured_element_bits,multiplication_bound,measured_multiplications\n";
  for (const auto& s : r.sessions) {
    out << s.session << ',' << s.t_j << ',' << s.formula_bits << ',' << s.measured_bits << ','
        << s.multiplication_bound << ',' << s.measured_multiplications << '\n';
  }
  return out.str();
}

inline std::string storage_csv(const Reconciliation& r) {
  std::ostringstream out;
  out << "user,k,table_formula_bits,analysis_formula_bits,stored_elements,stored_bits\n";
  for (const auto& s : r.storage) {
    out << to_string(s.user) << ',' << s.k << ',' << s.table_bits << ',' << s.analysis_bits << ','
        << s.actual_elements << ',' << s.actual_bits << '\n';
  }
  return out.str();
}

}  // namespace shkd
