#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hope {

/// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation: wrong flags, invalid configuration, empty free set.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Unreadable or inconsistent input data (parse failures, missing attributes).
class DataError : public Error {
public:
    using Error::Error;
};

/// Fitting failed. `trace` holds one human-readable line per iteration.
class EstimationError : public Error {
public:
    explicit EstimationError(const std::string& what, std::vector<std::string> trace = {})
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
    std::vector<std::string> trace_;
};

/// The MLE lies on the boundary of the parameter space (some coefficient is infinite).
class BoundaryError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

/// Process exit codes shared by the CLI.
enum class ExitCode : int { Ok = 0, Usage = 1, Data = 2, Estimation = 3 };

}  // namespace hope
