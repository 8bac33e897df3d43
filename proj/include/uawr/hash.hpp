#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace uawr {

/// Incremental SHA-256 (OpenSSL EVP) with lowercase hex output.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::string_view bytes);
    std::string hex_digest();

private:
    void* ctx_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace uawr
