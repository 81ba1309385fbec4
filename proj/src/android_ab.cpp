#include "bdiff/android_ab.hpp"

#include <charconv>

#include "bdiff/errors.hpp"

namespace bdiff {

namespace {

constexpr std::string_view kMagic = "ANDROID BACKUP\n";

// Reads one \n-terminated line starting at pos; newline consumed.
std::string take_line(std::span<const uint8_t> data, size_t& pos, const char* what) {
    size_t start = pos;
    while (pos < data.size() && data[pos] != '\n') ++pos;
    if (pos == data.size())
        throw CorruptPayload(std::string("unterminated ") + what + " line in backup header");
    std::string line(reinterpret_cast<const char*>(data.data() + start), pos - start);
    ++pos;
    return line;
}

}  // namespace

AbContent unwrap_android_backup(std::span<const uint8_t> ab) {
    if (ab.size() < kMagic.size() ||
        std::string_view(reinterpret_cast<const char*>(ab.data()), kMagic.size()) != kMagic)
        throw NotAndroidBackup("magic line missing");
    size_t pos = kMagic.size();
    std::string version_line = take_line(ab, pos, "version");
    std::string compress_line = take_line(ab, pos, "compression");
    std::string encryption_line = take_line(ab, pos, "encryption");

    AbContent out;
    auto [p, ec] = std::from_chars(version_line.data(), version_line.data() + version_line.size(),
                                   out.header.version);
    if (ec != std::errc() || p != version_line.data() + version_line.size())
        throw CorruptPayload("bad version line '" + version_line + "'");
    if (compress_line == "1")
        out.header.compressed = true;
    else if (compress_line == "0")
        out.header.compressed = false;
    else
        throw CorruptPayload("bad compression line '" + compress_line + "'");
    out.header.encryption = encryption_line;
    if (encryption_line != "none")
        throw UnsupportedEncryption("encryption algorithm '" + encryption_line +
                                    "' (only unencrypted backups are supported)");

    std::span<const uint8_t> payload = ab.subspan(pos);
    if (out.header.compressed) {
        try {
            out.tar = zlib_decompress(payload);
        } catch (const CorruptPayload& err) {
            throw CorruptPayload(std::string("backup payload: ") + err.what());
        }
    } else {
        out.tar.assign(payload.begin(), payload.end());
    }
    return out;
}

Bytes wrap_android_backup(std::span<const uint8_t> tar, bool compress, int version) {
    std::string header = std::string(kMagic) + std::to_string(version) + "\n" +
                         (compress ? "1" : "0") + "\nnone\n";
    Bytes out(header.begin(), header.end());
    if (compress) {
        Bytes z = zlib_compress(tar);
        out.insert(out.end(), z.begin(), z.end());
    } else {
        out.insert(out.end(), tar.begin(), tar.end());
    }
    return out;
}

}  // namespace bdiff
