#pragma once

#include <stdexcept>
#include <string>

namespace peerreview {

// Invariant violations: bad call sequences, mismatched lengths, malformed
// structures. These indicate bugs in the caller, not runtime conditions.
class structural_error : public std::logic_error {
public:
    explicit structural_error(const std::string& what) : std::logic_error(what) {}
};

// Argument outside its documented domain (e.g. confidence 0 on a 1-10 scale).
class domain_error : public std::invalid_argument {
public:
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Text that was expected to be machine-readable but is not.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or incomplete configuration, including missing API keys.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A backend call failed after exhausting retries, or the mock script ran dry.
class backend_error : public std::runtime_error {
public:
    explicit backend_error(const std::string& what, int status = 0)
        : std::runtime_error(what), status_(status) {}

    // Last HTTP status observed, 0 when not applicable (timeouts, mock).
    int status() const { return status_; }

private:
    int status_ = 0;
};

// The remote answered but the body did not match the expected wire format.
class protocol_error : public std::runtime_error {
public:
    explicit protocol_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace peerreview
