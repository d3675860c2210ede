#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace arq {

using Json = nlohmann::json;

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CanonicalJsonError : public Error {
public:
    using Error::Error;
};

/**
 * Deterministic serialization of a JSON value tree.
 *
 * Object keys are emitted in lexicographic byte order, no insignificant
 * whitespace is produced and numbers use their shortest round-trip form.
 * Floating point values that hold an exact integer are emitted as integers,
 * so numerically equal values always produce identical text.
 *
 * Throws CanonicalJsonError for NaN or infinite numbers.
 */
std::string canonical_json(const Json& value);

/// Returns a copy with integral floats folded to integers and -0.0 to 0.
Json canonicalize(const Json& value);

/// Parses text and throws arq::Error with the parser diagnostic on failure.
Json parse_json(const std::string& text, const std::string& what = "json");

/// Reads and parses a JSON file.
Json load_json_file(const std::string& path);

/// Writes text to path atomically (write to temp then rename).
void write_file_atomic(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace arq
