#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace toolweaver {

using Json = nlohmann::json;

/// Byte-stable serialization: object keys sorted by code point, arrays in order, UTF-8, no whitespace.
std::string canonical_dump(const Json& value);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a. Used for seeds and bucket hashing, never for identity.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Locates the first balanced `{...}` (or `[...]` when `allow_array`) literal in free text
/// that parses as JSON. String literals are honored while matching brackets.
std::optional<Json> extract_first_record(std::string_view text, bool allow_array = false);

/// Parses `text` rejecting duplicate object keys at any depth.
/// Throws ParseError with nlohmann's diagnostic on malformed input.
Json parse_strict(std::string_view text);

/// JSON value-kind name as used in type diagnostics: string, integer, number, boolean,
/// array, object or null.
std::string_view json_kind(const Json& value);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

} // namespace toolweaver
