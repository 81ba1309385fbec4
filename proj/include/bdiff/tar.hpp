#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdiff/bytes.hpp"

namespace bdiff {

/// One member of a POSIX tar stream, as the reader hands it out.
struct TarMember {
    std::string name;
    char typeflag = '0';      // '0' regular, '5' directory, '2' symlink
    std::string linkname;     // symlink target when typeflag == '2'
    Bytes data;               // regular-file content, empty otherwise
    uint64_t offset = 0;      // byte offset of the header block
};

/// Streaming POSIX (ustar) tar reader.
///
/// Header checksums are verified; a mismatch raises CorruptHeader with the
/// offending offset. A stream that ends mid-header or mid-payload raises
/// TruncatedArchive with the byte offset reached. GNU 'L' long-name blocks
/// are honored; pax headers and other special members are skipped with a
/// warning.
class TarReader {
public:
    explicit TarReader(std::span<const uint8_t> data);

    /// Returns the next file/dir/symlink member, or nullopt at end of archive.
    std::optional<TarMember> next();

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    bool done_ = false;
    std::vector<std::string> warnings_;
};

/// Canonical tar writer used for snapshot export and fixtures: ustar format,
/// sorted-name friendly, uid/gid 0, mtime 0, trailing two zero blocks.
class TarWriter {
public:
    void add_file(const std::string& name, std::span<const uint8_t> data, uint32_t mode = 0644);
    void add_file(const std::string& name, std::string_view data, uint32_t mode = 0644);
    void add_dir(const std::string& name, uint32_t mode = 0755);
    void add_symlink(const std::string& name, const std::string& target);
    Bytes finish();

private:
    void write_header(const std::string& name, uint64_t size, char typeflag,
                      const std::string& linkname, uint32_t mode);
    Bytes out_;
    bool finished_ = false;
};

}  // namespace bdiff
