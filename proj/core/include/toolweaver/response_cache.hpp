#pragma once

#include "toolweaver/json_util.hpp"

#include <cstddef>
#include <filesystem>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace toolweaver {

/// Bounded least-recently-used map from cache key to serialized payload. All operations are
/// internally synchronized.
class ResponseCache {
public:
    explicit ResponseCache(std::size_t capacity = 100'000);

    std::optional<Json> get(const std::string& key);
    /// Inserts or replaces; evicts the least recently used entry beyond capacity.
    void put(const std::string& key, Json payload);

    std::size_t size() const;
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t hits() const;
    std::size_t misses() const;

    /// Newline-delimited {key, payload} records, least recently used first.
    void save(const std::filesystem::path& path) const;
    /// Loads records written by save(); returns the number read.
    std::size_t load(const std::filesystem::path& path);

private:
    using Entry = std::pair<std::string, Json>;

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Entry> order_; ///< front = most recent
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

} // namespace toolweaver
