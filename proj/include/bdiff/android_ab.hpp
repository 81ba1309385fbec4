#pragma once

#include <string>

#include "bdiff/bytes.hpp"

namespace bdiff {

/// Android Backup container header fields, surfaced as ingestion metadata.
struct AbHeader {
    int version = 0;
    bool compressed = false;
    std::string encryption;  // "none" for the supported scope
};

struct AbContent {
    AbHeader header;
    Bytes tar;  // decompressed inner tar stream
};

/// Unwraps an unencrypted .ab container into its inner tar stream.
///
/// Errors: NotAndroidBackup when the magic line is absent,UnsupportedEncryption
/// for any encryption algorithm other than "none", CorruptPayload when the
/// deflate payload does not inflate.
AbContent unwrap_android_backup(std::span<const uint8_t> ab);

/// Wraps a tar stream into an .ab container (fixture emission).
Bytes wrap_android_backup(std::span<const uint8_t> tar, bool compress = true, int version = 5);

}  // namespace bdiff
