#ifndef HQ_ERRORS_HPP
#define HQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hq {

/* Base class for every error the library raises on purpose.  Callers that
 * want a single catch site (the CLI does) can catch hq::Error; everything
 * below maps a distinct failure mode to a distinct type. */
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/* Input document does not match the expected shape: missing field, wrong
 * type, unsupported version. */
class SchemaError : public Error {
public:
    using Error::Error;
};

/* Structurally valid input that is internally inconsistent: an edge naming
 * an unknown node, a duplicate node id. */
class IntegrityError : public Error {
public:
    using Error::Error;
};

/* A function id (or name) was looked up and no node carries it. */
class UnknownFunctionError : public Error {
public:
    using Error::Error;
};

class EmptyEntrySetError : public Error {
public:
    using Error::Error;
};

class DuplicateVerdictError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

class NotAPermutationError : public Error {
public:
    using Error::Error;
};

/* The executor cannot run at all (binary missing, command failed to spawn,
 * no scripted data for the bound binary).  Distinct from a probe that runs
 * and times out, which is recorded in the outcome instead. */
class ExecutorUnavailableError : public Error {
public:
    using Error::Error;
};

class TurnCapExceededError : public Error {
public:
    using Error::Error;
};

class BuildCapExhaustedError : public Error {
public:
    using Error::Error;
};

class NoViableCandidatesError : public Error {
public:
    using Error::Error;
};

class MissingSectionError : public Error {
public:
    using Error::Error;
};

/* Bad wiring rather than bad data: tool registry missing a category the
 * agent config demands, malformed config file, exhausted replay script. */
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hq

#endif
