#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdiff {

using Bytes = std::vector<uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const uint8_t> b);

Bytes read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::span<const uint8_t> data);
void write_file(const std::filesystem::path& p, std::string_view data);

/// zlib-wrapped deflate (the stream format the platform backup writers emit).
Bytes zlib_compress(std::span<const uint8_t> data, int level = 6);
Bytes zlib_decompress(std::span<const uint8_t> data);

/// Scratch directory root: BACKUPDIFF_TMPDIR when set, the system temp dir
/// otherwise. Callers create unique subdirectories beneath it.
std::filesystem::path scratch_root();

/// Creates a fresh unique directory under scratch_root(); caller owns cleanup.
class ScratchDir {
public:
    explicit ScratchDir(std::string_view tag);
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace bdiff
