#include "bdiff/blob_store.hpp"

#include "bdiff/errors.hpp"

namespace bdiff {

namespace fs = std::filesystem;

Digest MemBlobStore::put(std::span<const uint8_t> data) {
    Digest d = sha256(data);
    std::lock_guard lk(mu_);
    blobs_.emplace(d, Bytes(data.begin(), data.end()));
    return d;
}

bool MemBlobStore::contains(const Digest& d) const {
    std::lock_guard lk(mu_);
    return blobs_.count(d) > 0;
}

Bytes MemBlobStore::load(const Digest& d) const {
    std::lock_guard lk(mu_);
    auto it = blobs_.find(d);
    if (it == blobs_.end()) throw IOFailure("blob not in store: " + d.hex());
    return it->second;
}

DirBlobStore::DirBlobStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

std::string DirBlobStore::rel_blob_path(const Digest& d) {
    std::string hex = d.hex();
    return hex.substr(0, 2) + "/" + hex;
}

fs::path DirBlobStore::blob_path(const Digest& d) const { return root_ / rel_blob_path(d); }

Digest DirBlobStore::put(std::span<const uint8_t> data) {
    Digest d = sha256(data);
    fs::path p = blob_path(d);
    if (!fs::exists(p)) write_file(p, data);
    return d;
}

bool DirBlobStore::contains(const Digest& d) const { return fs::exists(blob_path(d)); }

Bytes DirBlobStore::load(const Digest& d) const {
    fs::path p = blob_path(d);
    if (!fs::exists(p)) throw IOFailure("blob file missing: " + p.string());
    return read_file(p);
}

}  // namespace bdiff
