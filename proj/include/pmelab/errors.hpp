#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pmelab {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorClass { Usage, Numerical };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, ErrorClass cls)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), cls_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  std::string kind_;
  ErrorClass cls_;
};

#define PMELAB_DEFINE_ERROR(Name, tag, cls)                                  \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(tag, what, cls) {}       \
  };

PMELAB_DEFINE_ERROR(InvalidGeometry, "invalid-geometry", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(ResolutionError, "resolution", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(OutsideDomain, "outside-domain", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(ParameterError, "parameter", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(TimeDomainError, "time-domain", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(IncompatibleGrids, "incompatible-grids", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(EmptyRegion, "empty-region", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(EmptySupport, "empty-support", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(DegenerateGradient, "degenerate-gradient", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(StabilityFault, "stability-fault", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(BufferReached, "buffer-reached", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(CalibrationError, "calibration", ErrorClass::Numerical)
PMELAB_DEFINE_ERROR(SeriesError, "series", ErrorClass::Usage)
PMELAB_DEFINE_ERROR(IoError, "io", ErrorClass::Usage)

#undef PMELAB_DEFINE_ERROR

/// Inverse conformal map did not converge; carries the final residual.
class MapInversionError : public Error {
 public:
  MapInversionError(const std::string& what, double residual)
      : Error("map-inversion", what, ErrorClass::Numerical), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Linear solve failed to reach tolerance; carries the residual history.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<double> history)
      : Error("no-convergence", what, ErrorClass::Numerical), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// One entry per offending line/field of a configuration text.
struct ConfigIssue {
  int line = 0;
  std::string field;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : Error("config", summarize(issues), ErrorClass::Usage), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& i : issues) {
      if (!out.empty()) out += "; ";
      if (i.line > 0) out += "line " + std::to_string(i.line) + ": ";
      out += i.field + ": " + i.message;
    }
    return out;
  }
  std::vector<ConfigIssue> issues_;
};

}  // namespace pmelab
