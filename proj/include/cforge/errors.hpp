#pragma once

#include <stdexcept>
#include <string>

namespace cforge {

// Base of everything thrown by the library. kind() is the stable error name
// used in reports and by the CLI to pick an exit code.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Bad input shapes, unknown names, malformed files.
class UsageError : public Error {
public:
    using Error::Error;
};

// The data is well formed but the numerics refuse to go on.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

#define CFORGE_DECLARE_ERROR(Name, Base)                                  \
    class Name : public Base {                                            \
    public:                                                               \
        explicit Name(const std::string& msg) : Base(#Name, msg) {}       \
    };

CFORGE_DECLARE_ERROR(ConfigError, UsageError)
CFORGE_DECLARE_ERROR(ValenceMismatch, UsageError)
CFORGE_DECLARE_ERROR(ShapeMismatch, UsageError)

CFORGE_DECLARE_ERROR(DegenerateMetric, NumericalFailure)
CFORGE_DECLARE_ERROR(IndexMismatch, NumericalFailure)
CFORGE_DECLARE_ERROR(NullVectorEncountered, NumericalFailure)
CFORGE_DECLARE_ERROR(SkewViolation, NumericalFailure)
CFORGE_DECLARE_ERROR(CompatibilityViolated, NumericalFailure)
CFORGE_DECLARE_ERROR(ProjectionFailed, NumericalFailure)
CFORGE_DECLARE_ERROR(NotClosed, NumericalFailure)
CFORGE_DECLARE_ERROR(RankDeficient, NumericalFailure)
CFORGE_DECLARE_ERROR(DegenerateInducedMetric, NumericalFailure)
CFORGE_DECLARE_ERROR(NoConvergence, NumericalFailure)
CFORGE_DECLARE_ERROR(ConePrecheckFailed, NumericalFailure)
CFORGE_DECLARE_ERROR(NotTransverse, NumericalFailure)

#undef CFORGE_DECLARE_ERROR

} // namespace cforge
