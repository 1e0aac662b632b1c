#pragma once

#include <stdexcept>
#include <string>

namespace oracle {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument / precondition violation at a module boundary.
struct InvalidInput : Error {
    using Error::Error;
};

// Run configuration is inconsistent or unusable.
struct ConfigError : Error {
    using Error::Error;
};

// A planning step cannot satisfy its constraints (names the shortfall).
struct InfeasibleError : Error {
    using Error::Error;
};

// Training loss became non-finite.
struct TrainingDiverged : Error {
    TrainingDiverged(int epoch, const std::string& what)
        : Error(what), epoch(epoch) {}
    int epoch;
};

// Preamble too weak to estimate the channel from.
struct ChannelUnrecoverable : Error {
    using Error::Error;
};

// File I/O errors, one subclass per failure category so callers can
// distinguish a truncated file from a stale format version.
struct FileError : Error {
    using Error::Error;
};
struct FormatError : FileError {     // bad magic / not one of our files
    using FileError::FileError;
};
struct VersionError : FileError {    // recognized file, unsupported version
    using FileError::FileError;
};
struct TruncatedError : FileError {  // declared counts exceed actual bytes
    using FileError::FileError;
};
struct ChecksumError : FileError {   // payload CRC mismatch
    using FileError::FileError;
};
struct ManifestError : FileError {   // tensor/trace table inconsistent
    using FileError::FileError;
};

}  // namespace oracle
