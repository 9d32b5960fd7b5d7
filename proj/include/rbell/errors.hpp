#pragma once

#include <stdexcept>
#include <string>

namespace rbell {

/// Precondition violated by a caller-supplied value (non-finite angle,
/// mismatched observable side, |target_e| > 1, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A measurement branch with zero Born probability was requested.
class ImpossibleOutcome : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An ensemble has no records for a setting cell that a statistic needs.
class InsufficientData : public std::runtime_error {
public:
    InsufficientData(int alice_setting, int bob_setting)
        : std::runtime_error("no records for setting cell (" + std::to_string(alice_setting) + "," +
                             std::to_string(bob_setting) + ")"),
          alice_setting_(alice_setting), bob_setting_(bob_setting) {}

    int alice_setting() const noexcept { return alice_setting_; }
    int bob_setting() const noexcept { return bob_setting_; }

private:
    int alice_setting_;
    int bob_setting_;
};

/// Postselection weights for a cell sum to zero, so the strategy cannot assign.
class StrategyDegenerate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A strategy that needs coin identities was handed to a restricted-information path.
class InformationBarrierViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace rbell
