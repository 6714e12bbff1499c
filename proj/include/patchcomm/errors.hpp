#pragma once
// Error taxonomy shared by all patchcomm components. Every throwing path in
// the library uses one of these; absence of knowledge is never an error.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patchcomm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A concept label that normalizes to the empty string.
struct InvalidConcept : Error {
    using Error::Error;
};

// Unrecoverable problem while reading a KB dump, embedding file or model file.
struct IngestError : Error {
    using Error::Error;
};

// A term that cannot be resolved to an embedding vector, even after backoff.
struct UnknownConcept : Error {
    using Error::Error;
};

// Syntactically or structurally invalid consultation message.
struct MalformedRequest : Error {
    MalformedRequest(const std::string& what, std::size_t line, std::size_t col)
        : Error(what + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
          line(line),
          col(col) {}
    std::size_t line = 0;
    std::size_t col = 0;
};

struct DatasetError : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct EmptyCandidates : Error {
    using Error::Error;
};

struct EmptyModelSet : Error {
    using Error::Error;
};

// Invalid configuration (missing backend, impossible trim counts, ...).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace patchcomm
