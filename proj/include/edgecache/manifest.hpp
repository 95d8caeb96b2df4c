#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "edgecache/error.hpp"

namespace edgecache {

inline constexpr std::string_view kVersion = "1.0.0";

/// 64-bit FNV-1a, used to fingerprint input files in run manifests.
class Fnv1a {
  public:
    void update(std::string_view bytes)
    {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 0x100000001b3ULL;
        }
    }

    std::uint64_t value() const { return hash_; }

    std::string hex() const
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string file_digest(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path);
    Fnv1a h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h.update({buf, static_cast<std::size_t>(in.gcount())});
    return "fnv1a64:" + h.hex();
}

} // namespace edgecache
