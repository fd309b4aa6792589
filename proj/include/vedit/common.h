#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace vedit {

using Mat = Eigen::MatrixXd;

// Error taxonomy shared by all modules. Every failure surfaced to a caller is
// one of these, so the CLI can map exception type -> exit code.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};
struct VocabError : std::runtime_error {
    explicit VocabError(const std::string& m) : std::runtime_error(m) {}
};
struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
struct ScheduleError : std::runtime_error {
    explicit ScheduleError(const std::string& m) : std::runtime_error(m) {}
};
struct LayoutError : std::runtime_error {
    explicit LayoutError(const std::string& m) : std::runtime_error(m) {}
};
struct ComparabilityError : std::runtime_error {
    explicit ComparabilityError(const std::string& m) : std::runtime_error(m) {}
};
struct UnsatisfiableInstructionError : std::runtime_error {
    explicit UnsatisfiableInstructionError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace vedit
