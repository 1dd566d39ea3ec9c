#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lmoa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched vector lengths or shapes between cooperating values.
class StructuralError : public Error {
public:
    using Error::Error;
};

// A mask that selects no position, or a mask that does not fit its image.
class MaskError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Out-of-range configuration or model parameters.
class ParamError : public Error {
public:
    using Error::Error;
};

// A run-time invariant was found violated (feasibility, mask invariance, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Anything that goes wrong while talking to a classifier. `query_id` is the
// id of the in-flight query, or -1 when no query was in flight.
class OracleError : public Error {
public:
    OracleError(const std::string& what, std::int64_t query_id = -1)
        : Error(what), query_id_(query_id) {}

    std::int64_t query_id() const noexcept { return query_id_; }

private:
    std::int64_t query_id_;
};

class TransportError : public OracleError {
public:
    using OracleError::OracleError;
};

} // namespace lmoa
