#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace shiftlab {

// Exit-code groups used by the CLI: 1 = validation / user input,
// 2 = infeasibility or generator failure at runtime.
class Error : public std::runtime_error {
public:
    Error(std::string kind, int exit_code, const std::string& message)
        : std::runtime_error(kind + ": " + message),
          kind_(std::move(kind)),
          exit_code_(exit_code) {}

    const std::string& kind() const { return kind_; }
    int exit_code() const { return exit_code_; }

private:
    std::string kind_;
    int exit_code_;
};

inline Error validation_error(std::string kind, const std::string& message) {
    return Error(std::move(kind), 1, message);
}

inline Error infeasible_error(std::string kind, const std::string& message) {
    return Error(std::move(kind), 2, message);
}

}  // namespace shiftlab
