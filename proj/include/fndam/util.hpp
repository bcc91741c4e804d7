#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace fndam {

std::string sha256_hex(std::string_view data);

/// Typed access to a JSON tree that reports failures as ParseError with the
/// JSON-pointer path of the offending field.
class JsonReader {
public:
    JsonReader(const nlohmann::json& node, std::string path) : node_(&node), path_(std::move(path)) {}

    const nlohmann::json& node() const noexcept { return *node_; }
    const std::string& path() const noexcept { return path_; }

    bool has(const std::string& key) const { return node_->is_object() && node_->contains(key); }
    JsonReader at(const std::string& key) const;
    JsonReader at(std::size_t index) const;
    std::size_t array_size() const;

    double number() const;
    double number(const std::string& key) const { return at(key).number(); }
    std::uint64_t unsigned_integer() const;
    std::uint64_t unsigned_integer(const std::string& key) const { return at(key).unsigned_integer(); }
    std::string string() const;
    std::string string(const std::string& key) const { return at(key).string(); }
    bool boolean() const;
    bool boolean(const std::string& key) const { return at(key).boolean(); }

    /// Throws if the object holds keys outside `allowed`.
    void expect_keys(std::initializer_list<std::string_view> allowed) const;

private:
    const nlohmann::json* node_;
    std::string path_;
};

}  // namespace fndam
