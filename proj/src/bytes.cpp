#include "bdiff/bytes.hpp"

#include <zlib.h>

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>

#include "bdiff/errors.hpp"

namespace bdiff {

namespace fs = std::filesystem;

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_string(std::span<const uint8_t> b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IOFailure("cannot open " + p.string());
    Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IOFailure("read failed on " + p.string());
    return out;
}

void write_file(const fs::path& p, std::span<const uint8_t> data) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IOFailure("cannot create " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw IOFailure("write failed on " + p.string());
}

void write_file(const fs::path& p, std::string_view data) {
    write_file(p, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

Bytes zlib_compress(std::span<const uint8_t> data, int level) {
    uLongf bound = compressBound(uLong(data.size()));
    Bytes out(bound);
    int rc = compress2(out.data(), &bound, data.data(), uLong(data.size()), level);
    if (rc != Z_OK) throw CorruptPayload("zlib compress failed rc=" + std::to_string(rc));
    out.resize(bound);
    return out;
}

Bytes zlib_decompress(std::span<const uint8_t> data) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit(&zs) != Z_OK) throw CorruptPayload("inflateInit failed");
    Bytes out;
    out.reserve(data.size() * 3 + 64);
    uint8_t chunk[1 << 15];
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = uInt(data.size());
    int rc = Z_OK;
    do {
        zs.next_out = chunk;
        zs.avail_out = sizeof(chunk);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw CorruptPayload("zlib inflate failed rc=" + std::to_string(rc));
        }
        out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw CorruptPayload("zlib stream ended prematurely");
    return out;
}

fs::path scratch_root() {
    if (const char* env = std::getenv("BACKUPDIFF_TMPDIR"); env && *env) return fs::path(env);
    return fs::temp_directory_path();
}

ScratchDir::ScratchDir(std::string_view tag) {
    static std::atomic<uint64_t> counter{0};
    std::random_device rd;
    uint64_t n = counter.fetch_add(1);
    path_ = scratch_root() / ("backupdiff-" + std::string(tag) + "-" + std::to_string(rd()) + "-" +
                              std::to_string(n));
    fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

}  // namespace bdiff
