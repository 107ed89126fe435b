#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace teamcoop {

enum class Errc {
  DuplicateId,
  InvalidCapability,
  InvalidRobot,
  EmptyTeam,
  NotATeam,
  AlreadyMember,
  NotAMember,
  InvalidPartition,
  UnknownAction,
  UndefinedPosterior,
  DegenerateModel,
  InvalidModel,
  EmptyAggregate,
  NonErgodic,
  InvalidMember,
  TooLarge,
  InvalidParams,
  InvalidScenario,
  EmptyTrajectory,
  Parse,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InvalidCapability: return "InvalidCapability";
    case Errc::InvalidRobot: return "InvalidRobot";
    case Errc::EmptyTeam: return "EmptyTeam";
    case Errc::NotATeam: return "NotATeam";
    case Errc::AlreadyMember: return "AlreadyMember";
    case Errc::NotAMember: return "NotAMember";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::UnknownAction: return "UnknownAction";
    case Errc::UndefinedPosterior: return "UndefinedPosterior";
    case Errc::DegenerateModel: return "DegenerateModel";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::EmptyAggregate: return "EmptyAggregate";
    case Errc::NonErgodic: return "NonErgodic";
    case Errc::InvalidMember: return "InvalidMember";
    case Errc::TooLarge: return "TooLarge";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::EmptyTrajectory: return "EmptyTrajectory";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, with `context` prepended to the detail text.
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace teamcoop
