#include "toolweaver/response_cache.hpp"

#include "toolweaver/errors.hpp"

#include <fstream>

namespace toolweaver {

ResponseCache::ResponseCache(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw PreconditionError("cache capacity must be positive");
}

std::optional<Json> ResponseCache::get(const std::string& key) {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(key);
    if (it == index_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
}

void ResponseCache::put(const std::string& key, Json payload) {
    std::lock_guard lock(mutex_);
    if (const auto it = index_.find(key); it != index_.end()) {
        it->second->second = std::move(payload);
        order_.splice(order_.begin(), order_, it->second);
        return;
    }
    order_.emplace_front(key, std::move(payload));
    index_.emplace(key, order_.begin());
    while (order_.size() > capacity_) {
        index_.erase(order_.back().first);
        order_.pop_back();
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
}

std::size_t ResponseCache::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t ResponseCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void ResponseCache::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache file " + path.string());
    std::lock_guard lock(mutex_);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        out << canonical_dump(Json{{"key", it->first}, {"payload", it->second}}) << '\n';
    }
    if (!out) throw IoError("failed writing cache file " + path.string());
}

std::size_t ResponseCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read cache file " + path.string());
    std::size_t count = 0;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (trim(line).empty()) continue;
        Json record;
        try {
            record = Json::parse(line);
            put(record.at("key").get<std::string>(), record.at("payload"));
        } catch (const Json::exception& e) {
            throw ParseError(std::string("malformed cache record: ") + e.what(), line_no);
        }
        ++count;
    }
    return count;
}

} // namespace toolweaver
