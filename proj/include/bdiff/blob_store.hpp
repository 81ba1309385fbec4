#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "bdiff/bytes.hpp"
#include "bdiff/hash.hpp"

namespace bdiff {

/// Content-addressed value storage: the digest is the handle. Snapshots hold
/// a store reference; entry values are loaded lazily through it.
class BlobStore {
public:
    virtual ~BlobStore() = default;

    /// Stores the bytes and returns their digest (idempotent).
    virtual Digest put(std::span<const uint8_t> data) = 0;
    virtual bool contains(const Digest& d) const = 0;

    /// Loads the value for a digest; throws IOFailure when absent/unreadable.
    virtual Bytes load(const Digest& d) const = 0;
};

class MemBlobStore : public BlobStore {
public:
    Digest put(std::span<const uint8_t> data) override;
    bool contains(const Digest& d) const override;
    Bytes load(const Digest& d) const override;

private:
    mutable std::mutex mu_;
    std::map<Digest, Bytes> blobs_;
};

/// On-disk store: blobs live at <root>/<first two hex chars>/<full hex>.
class DirBlobStore : public BlobStore {
public:
    explicit DirBlobStore(std::filesystem::path root);
    Digest put(std::span<const uint8_t> data) override;
    bool contains(const Digest& d) const override;
    Bytes load(const Digest& d) const override;

    std::filesystem::path blob_path(const Digest& d) const;
    /// "ab/abcdef..." — the manifest-relative blob path.
    static std::string rel_blob_path(const Digest& d);

private:
    std::filesystem::path root_;
};

}  // namespace bdiff
