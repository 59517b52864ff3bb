#pragma once

#include <string>

#include <json.hpp>

namespace lowrank {

// Deterministic serialization: object keys in sorted order (the default
// nlohmann object is an ordered map), two-space indentation, arrays of
// scalars on a single line, and every floating-point number printed with 17
// significant digits so the decimal text round-trips to the identical bits.
// Non-finite values, which JSON cannot carry, are emitted as the strings
// "inf", "-inf" and "nan".
std::string json_to_string(const nlohmann::json& value);

// Writes content to path via a sibling temporary file and an atomic rename,
// so readers never observe a partially written artifact. Throws io_error.
void write_text_atomic(const std::string& path, const std::string& content);

// Parses a JSON file; failures (missing file, malformed text) throw io_error.
nlohmann::json read_json_file(const std::string& path);

}  // namespace lowrank
