#pragma once

#include <stdexcept>
#include <string>

namespace sop {

/// Base of every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GenerationExhausted : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SessionClosed : public Error {
public:
    using Error::Error;
};

class UnboundPlaceholder : public Error {
public:
    explicit UnboundPlaceholder(std::string name)
        : Error("unbound template placeholder {" + name + "}"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class EndpointFailure : public Error {
public:
    using Error::Error;
};

/// Non-retryable credential rejection (HTTP 401/403).
class AuthFailure : public EndpointFailure {
public:
    using EndpointFailure::EndpointFailure;
};

class AgentAborted : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class SandboxError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration; `field` names the offending setting.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace sop
