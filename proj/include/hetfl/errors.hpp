#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hetfl {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/mask/layout sizes.
struct DimensionError : Error {
    using Error::Error;
};

/// Invalid configuration or precondition violation.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
    explicit ConfigError(const std::vector<std::string>& messages)
        : Error(join(messages)), details(messages) {}

    std::vector<std::string> details;

  private:
    static std::string join(const std::vector<std::string>& messages) {
        std::string out = "configuration invalid:";
        for (const auto& m : messages) {
            out += "\n  - " + m;
        }
        return out;
    }
};

/// Non-finite values encountered during numeric work.
struct NumericError : Error {
    using Error::Error;
};

/// Training produced a non-finite model.
struct DivergenceError : Error {
    using Error::Error;
};

/// Malformed input file contents (bad magic, unparsable cells).
struct FormatError : Error {
    using Error::Error;
};

/// Inputs that parse individually but disagree with each other.
struct ConsistencyError : Error {
    using Error::Error;
};

/// Missing, truncated, or unreadable files.
struct IoError : Error {
    using Error::Error;
};

}  // namespace hetfl
