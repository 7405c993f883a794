#include "toolweaver/json_util.hpp"

#include "toolweaver/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <vector>

namespace toolweaver {

std::string canonical_dump(const Json& value) {
    // nlohmann::json stores objects in std::map<std::string, ...>; byte order of UTF-8
    // strings equals code point order.
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

namespace {

// Index one past the bracket closing the one at `open`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t open) {
    std::vector<char> stack;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_string = true;
            break;
        case '{':
        case '[':
            stack.push_back(c);
            break;
        case '}':
        case ']': {
            const char want = c == '}' ? '{' : '[';
            if (stack.empty() || stack.back() != want) return std::string_view::npos;
            stack.pop_back();
            if (stack.empty()) return i + 1;
            break;
        }
        default:
            break;
        }
    }
    return std::string_view::npos;
}

} // namespace

std::optional<Json> extract_first_record(std::string_view text, bool allow_array) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '{' && !(allow_array && c == '[')) continue;
        const std::size_t end = balanced_end(text, i);
        if (end == std::string_view::npos) continue;
        Json parsed = Json::parse(text.substr(i, end - i), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
    }
    return std::nullopt;
}

Json parse_strict(std::string_view text) {
    std::vector<std::set<std::string>> seen;
    std::string duplicate;
    Json::parser_callback_t callback = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
        case Json::parse_event_t::object_start:
            seen.emplace_back();
            break;
        case Json::parse_event_t::object_end:
            if (!seen.empty()) seen.pop_back();
            break;
        case Json::parse_event_t::key:
            if (!seen.empty() && !seen.back().insert(parsed.get<std::string>()).second &&
                duplicate.empty()) {
                duplicate = parsed.get<std::string>();
            }
            break;
        default:
            break;
        }
        return true;
    };
    Json result;
    try {
        result = Json::parse(text, callback);
    } catch (const Json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!duplicate.empty()) throw ParseError("duplicate key '" + duplicate + "'");
    return result;
}

std::string_view json_kind(const Json& value) {
    switch (value.type()) {
    case Json::value_t::string:
        return "string";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
        return "integer";
    case Json::value_t::number_float:
        return "number";
    case Json::value_t::boolean:
        return "boolean";
    case Json::value_t::array:
        return "array";
    case Json::value_t::object:
        return "object";
    default:
        return "null";
    }
}

std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto begin = std::find_if_not(s.begin(), s.end(), is_space);
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string();
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace toolweaver
