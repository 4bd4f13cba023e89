#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shkd {

enum class Errc {
  contract_violation,
  division_by_zero,
  configuration,
  not_authorized,
  revocation_capacity,
  padding_exhausted,
  system_failed,
  sequencing,
  not_a_member,
  recovery_failure,
  cannot_heal_forward,
  capacity,
  session_exhausted,
  decode,
  census_infeasible,
  scenario_invalid,
  reconciliation_failure,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::contract_violation: return "contract violation";
    case Errc::division_by_zero: return "division by zero";
    case Errc::configuration: return "configuration error";
    case Errc::not_authorized: return "not authorized";
    case Errc::revocation_capacity: return "revocation capacity exceeded";
    case Errc::padding_exhausted: return "padding exhausted";
    case Errc::system_failed: return "system failed";
    case Errc::sequencing: return "sequencing error";
    case Errc::not_a_member: return "not a member";
    case Errc::recovery_failure: return "recovery failure";
    case Errc::cannot_heal_forward: return "cannot heal forward";
    case Errc::capacity: return "capacity exhausted";
    case Errc::session_exhausted: return "sessions exhausted";
    case Errc::decode: return "decode error";
    case Errc::census_infeasible: return "census infeasible";
    case Errc::scenario_invalid: return "scenario invalid";
    case Errc::reconciliation_failure: return "reconciliation failure";
  }
  return "unknown error";
}

/// Base of every error raised by the library. `code()` identifies the
/// failure class; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

template <Errc Code>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(Code, what) {}
};

using ContractViolation = CodedError<Errc::contract_violation>;
using DivisionByZero = CodedError<Errc::division_by_zero>;
using ConfigurationError = CodedError<Errc::configuration>;
using NotAuthorized = CodedError<Errc::not_authorized>;
using RevocationCapacityError = CodedError<Errc::revocation_capacity>;
using PaddingExhausted = CodedError<Errc::padding_exhausted>;
using SystemFailed = CodedError<Errc::system_failed>;
using SequencingError = CodedError<Errc::sequencing>;
using NotAMember = CodedError<Errc::not_a_member>;
using RecoveryFailure = CodedError<Errc::recovery_failure>;
using CannotHealForward = CodedError<Errc::cannot_heal_forward>;
using CapacityError = CodedError<Errc::capacity>;
using SessionExhausted = CodedError<Errc::session_exhausted>;
using DecodeError = CodedError<Errc::decode>;
using CensusInfeasible = CodedError<Errc::census_infeasible>;
using ScenarioInvalid = CodedError<Errc::scenario_invalid>;
using ReconciliationFailure = CodedError<Errc::reconciliation_failure>;

}  // namespace shkd
