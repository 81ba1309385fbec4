#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdiff {

/// 256-bit content digest. Equality of two values is decided by digest
/// equality everywhere in the pipeline; the algorithm identifier is written
/// into every snapshot manifest so a reader can detect algorithm drift.
struct Digest {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    std::string hex() const;
    static Digest from_hex(std::string_view h);
};

constexpr const char* kDigestAlgorithm = "sha256";

class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    Digest finish();

private:
    void process_block(const uint8_t* p);
    std::array<uint32_t, 8> state_;
    uint64_t total_ = 0;
    std::array<uint8_t, 64> buf_{};
    size_t buflen_ = 0;
};

/// 160-bit hash used to derive backup blob identifiers from
/// "<domain>-<relativePath>" strings.
class Sha1 {
public:
    Sha1();
    void update(const void* data, size_t len);
    std::array<uint8_t, 20> finish();

private:
    void process_block(const uint8_t* p);
    std::array<uint32_t, 5> state_;
    uint64_t total_ = 0;
    std::array<uint8_t, 64> buf_{};
    size_t buflen_ = 0;
};

Digest sha256(std::span<const uint8_t> data);
Digest sha256(std::string_view data);
std::string sha1_hex(std::string_view data);

std::string to_hex(std::span<const uint8_t> data);

}  // namespace bdiff
