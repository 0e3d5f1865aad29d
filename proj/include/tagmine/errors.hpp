#pragma once

#include <stdexcept>
#include <string>

namespace tagmine {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text or document that does not follow its declared format.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Parameter outside its permitted domain (thresholds, weights, radii).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data that violates a structural invariant the caller promised.
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InvalidHashtag : public Error {
public:
    using Error::Error;
};

/// A curation batch that cannot be applied; the lexicon is left untouched.
class CurationError : public Error {
public:
    using Error::Error;
};

/// Raised by source adapters for transient fetch failures; fetch_all retries these.
class SourceError : public Error {
public:
    using Error::Error;
};

}  // namespace tagmine
