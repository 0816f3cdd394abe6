#pragma once

#include <stdexcept>
#include <string>

namespace alignforge {

// Base class for all alignforge errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote or stub model call failed after all retries.
struct ProviderError : Error {
    using Error::Error;
};

// Provider cannot perform the requested operation (e.g. no logprob support).
struct CapabilityError : ProviderError {
    using ProviderError::ProviderError;
};

// Malformed container file, header, or record.
struct ParseError : Error {
    using Error::Error;
};

// Invalid or inconsistent configuration.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace alignforge
