#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salab {

enum class ErrorCode {
  // green-core
  NotAlmostComplex,
  NotIsometry,
  DegenerateGreenForm,
  DimensionMismatch,
  RankDeficient,
  WrongRank,
  NotLagrangian,
  NotHermitian,
  OutOfChart,
  RankMismatch,
  EigensolverFailure,
  // realization
  QuadratureFailure,
  SingularTraceMap,
  RootFindingStall,
  MultiplicityAmbiguity,
  BackgroundSpectrum,
  // series-engine
  NotInComplement,
  ConsistencyFailure,
  SpectrumCollision,
  TailTooLarge,
  SingularTraceSolve,
  SingularF,
  // instability-lab
  NotUnstable,
  FNotInvertible,
  NotCertifiable,
  Inconclusive,
  // cli
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotAlmostComplex: return "NotAlmostComplex";
    case ErrorCode::NotIsometry: return "NotIsometry";
    case ErrorCode::DegenerateGreenForm: return "DegenerateGreenForm";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::WrongRank: return "WrongRank";
    case ErrorCode::NotLagrangian: return "NotLagrangian";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::SingularTraceMap: return "SingularTraceMap";
    case ErrorCode::RootFindingStall: return "RootFindingStall";
    case ErrorCode::MultiplicityAmbiguity: return "MultiplicityAmbiguity";
    case ErrorCode::BackgroundSpectrum: return "BackgroundSpectrum";
    case ErrorCode::NotInComplement: return "NotInComplement";
    case ErrorCode::ConsistencyFailure: return "ConsistencyFailure";
    case ErrorCode::SpectrumCollision: return "SpectrumCollision";
    case ErrorCode::TailTooLarge: return "TailTooLarge";
    case ErrorCode::SingularTraceSolve: return "SingularTraceSolve";
    case ErrorCode::SingularF: return "SingularF";
    case ErrorCode::NotUnstable: return "NotUnstable";
    case ErrorCode::FNotInvertible: return "FNotInvertible";
    case ErrorCode::NotCertifiable: return "NotCertifiable";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. All library failures throw this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace salab
