#include "fndam/util.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "fndam/errors.hpp"

namespace fndam {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

JsonReader JsonReader::at(const std::string& key) const {
    if (!node_->is_object()) {
        throw ParseError(path_, "expected an object");
    }
    const auto it = node_->find(key);
    if (it == node_->end()) {
        throw ParseError(path_ + "/" + key, "missing field");
    }
    return JsonReader(*it, path_ + "/" + key);
}

JsonReader JsonReader::at(std::size_t index) const {
    if (!node_->is_array()) {
        throw ParseError(path_, "expected an array");
    }
    if (index >= node_->size()) {
        throw ParseError(fmt::format("{}/{}", path_, index), "index out of range");
    }
    return JsonReader((*node_)[index], fmt::format("{}/{}", path_, index));
}

std::size_t JsonReader::array_size() const {
    if (!node_->is_array()) {
        throw ParseError(path_, "expected an array");
    }
    return node_->size();
}

double JsonReader::number() const {
    if (!node_->is_number()) {
        throw ParseError(path_, "expected a number");
    }
    const double v = node_->get<double>();
    if (!std::isfinite(v)) {
        throw ParseError(path_, "number is not finite");
    }
    return v;
}

std::uint64_t JsonReader::unsigned_integer() const {
    if (!node_->is_number_integer() || (node_->is_number_integer() && !node_->is_number_unsigned() &&
                                        node_->get<std::int64_t>() < 0)) {
        throw ParseError(path_, "expected a non-negative integer");
    }
    return node_->get<std::uint64_t>();
}

std::string JsonReader::string() const {
    if (!node_->is_string()) {
        throw ParseError(path_, "expected a string");
    }
    return node_->get<std::string>();
}

bool JsonReader::boolean() const {
    if (!node_->is_boolean()) {
        throw ParseError(path_, "expected a boolean");
    }
    return node_->get<bool>();
}

void JsonReader::expect_keys(std::initializer_list<std::string_view> allowed) const {
    if (!node_->is_object()) {
        throw ParseError(path_, "expected an object");
    }
    for (const auto& [key, value] : node_->items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError(path_ + "/" + key, "unknown key");
        }
    }
}

}  // namespace fndam
