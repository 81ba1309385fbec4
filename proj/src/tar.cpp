#include "bdiff/tar.hpp"

#include <algorithm>
#include <cstring>

#include "bdiff/errors.hpp"

namespace bdiff {

namespace {

constexpr size_t kBlock = 512;

struct RawHeader {
    char name[100];
    char mode[8];
    char uid[8];
    char gid[8];
    char size[12];
    char mtime[12];
    char chksum[8];
    char typeflag;
    char linkname[100];
    char magic[6];
    char version[2];
    char uname[32];
    char gname[32];
    char devmajor[8];
    char devminor[8];
    char prefix[155];
    char pad[12];
};
static_assert(sizeof(RawHeader) == 512);

bool all_zero(const uint8_t* p, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (p[i] != 0) return false;
    return true;
}

uint64_t parse_numeric(const char* field, size_t len, size_t offset) {
    // base-256 extension for sizes beyond octal range
    if (len > 0 && (uint8_t(field[0]) & 0x80)) {
        uint64_t v = uint8_t(field[0]) & 0x7f;
        for (size_t i = 1; i < len; ++i) v = (v << 8) | uint8_t(field[i]);
        return v;
    }
    uint64_t v = 0;
    bool seen = false;
    for (size_t i = 0; i < len; ++i) {
        char c = field[i];
        if (c == ' ' || c == '\0') {
            if (seen) break;
            continue;
        }
        if (c < '0' || c > '7')
            throw CorruptHeader("non-octal digit in numeric field at offset " +
                                std::to_string(offset));
        v = v * 8 + uint64_t(c - '0');
        seen = true;
    }
    return v;
}

std::string field_str(const char* field, size_t len) {
    size_t n = 0;
    while (n < len && field[n] != '\0') ++n;
    return std::string(field, n);
}

uint32_t header_checksum(const uint8_t* block) {
    uint32_t sum = 0;
    for (size_t i = 0; i < kBlock; ++i)
        sum += (i >= 148 && i < 156) ? uint32_t(' ') : uint32_t(block[i]);
    return sum;
}

size_t padded(uint64_t n) { return size_t((n + kBlock - 1) / kBlock * kBlock); }

}  // namespace

TarReader::TarReader(std::span<const uint8_t> data) : data_(data) {}

std::optional<TarMember> TarReader::next() {
    std::string pending_longname;
    while (!done_) {
        if (pos_ == data_.size()) {
            // EOF without the trailing zero blocks: tolerated with a warning.
            warnings_.push_back("archive ends without zero-block trailer");
            done_ = true;
            return std::nullopt;
        }
        if (data_.size() - pos_ < kBlock)
            throw TruncatedArchive("header truncated at offset " + std::to_string(pos_));
        const uint8_t* block = data_.data() + pos_;
        if (all_zero(block, kBlock)) {
            done_ = true;
            return std::nullopt;
        }
        const RawHeader* h = reinterpret_cast<const RawHeader*>(block);
        uint32_t want = uint32_t(parse_numeric(h->chksum, sizeof(h->chksum), pos_));
        if (header_checksum(block) != want)
            throw CorruptHeader("checksum mismatch at offset " + std::to_string(pos_));
        uint64_t size = parse_numeric(h->size, sizeof(h->size), pos_);
        uint64_t header_off = pos_;
        pos_ += kBlock;
        size_t body = padded(size);
        if (data_.size() - pos_ < size)
            throw TruncatedArchive("member body truncated at offset " + std::to_string(pos_));
        std::span<const uint8_t> payload = data_.subspan(pos_, size_t(size));
        pos_ += std::min(body, data_.size() - pos_);

        char type = h->typeflag;
        std::string name = field_str(h->name, sizeof(h->name));
        std::string prefix = field_str(h->prefix, sizeof(h->prefix));
        bool ustar = std::memcmp(h->magic, "ustar", 5) == 0;
        if (ustar && !prefix.empty()) name = prefix + "/" + name;
        if (!pending_longname.empty()) {
            name = pending_longname;
            pending_longname.clear();
        }

        switch (type) {
            case 'L': {  // GNU long name applies to the following member
                pending_longname = field_str(reinterpret_cast<const char*>(payload.data()),
                                             payload.size());
                continue;
            }
            case '0':
            case '\0': {
                TarMember m;
                m.name = name;
                m.typeflag = '0';
                m.data.assign(payload.begin(), payload.end());
                m.offset = header_off;
                return m;
            }
            case '5': {
                TarMember m;
                m.name = name;
                m.typeflag = '5';
                m.offset = header_off;
                return m;
            }
            case '2': {
                TarMember m;
                m.name = name;
                m.typeflag = '2';
                m.linkname = field_str(h->linkname, sizeof(h->linkname));
                m.offset = header_off;
                return m;
            }
            default:
                warnings_.push_back("skipped member '" + name + "' with typeflag '" +
                                    std::string(1, type) + "'");
                continue;
        }
    }
    return std::nullopt;
}

void TarWriter::write_header(const std::string& name, uint64_t size, char typeflag,
                             const std::string& linkname, uint32_t mode) {
    std::string hname = name;
    std::string hprefix;
    if (hname.size() > 100) {
        // ustar prefix split at a slash; fixtures keep paths within limits
        size_t cut = hname.rfind('/', 155);
        if (cut == std::string::npos || hname.size() - cut - 1 > 100)
            throw Error("tar member name too long: " + name);
        hprefix = hname.substr(0, cut);
        hname = hname.substr(cut + 1);
    }
    uint8_t block[kBlock];
    std::memset(block, 0, kBlock);
    RawHeader* h = reinterpret_cast<RawHeader*>(block);
    std::memcpy(h->name, hname.data(), hname.size());
    std::snprintf(h->mode, sizeof(h->mode), "%07o", mode);
    std::snprintf(h->uid, sizeof(h->uid), "%07o", 0);
    std::snprintf(h->gid, sizeof(h->gid), "%07o", 0);
    std::snprintf(h->size, sizeof(h->size), "%011llo", static_cast<unsigned long long>(size));
    std::snprintf(h->mtime, sizeof(h->mtime), "%011o", 0);
    h->typeflag = typeflag;
    if (!linkname.empty()) {
        if (linkname.size() > 100) throw Error("tar linkname too long: " + linkname);
        std::memcpy(h->linkname, linkname.data(), linkname.size());
    }
    std::memcpy(h->magic, "ustar", 6);
    h->version[0] = '0';
    h->version[1] = '0';
    std::memcpy(h->prefix, hprefix.data(), hprefix.size());
    std::memset(h->chksum, ' ', sizeof(h->chksum));
    uint32_t sum = 0;
    for (size_t i = 0; i < kBlock; ++i) sum += block[i];
    std::snprintf(h->chksum, 7, "%06o", sum);
    h->chksum[7] = ' ';
    out_.insert(out_.end(), block, block + kBlock);
}

void TarWriter::add_file(const std::string& name, std::span<const uint8_t> data, uint32_t mode) {
    write_header(name, data.size(), '0', "", mode);
    out_.insert(out_.end(), data.begin(), data.end());
    out_.resize(out_.size() + (padded(data.size()) - data.size()), 0);
}

void TarWriter::add_file(const std::string& name, std::string_view data, uint32_t mode) {
    add_file(name,
             std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()), data.size()),
             mode);
}

void TarWriter::add_dir(const std::string& name, uint32_t mode) {
    std::string n = name;
    if (!n.ends_with('/')) n += '/';
    write_header(n, 0, '5', "", mode);
}

void TarWriter::add_symlink(const std::string& name, const std::string& target) {
    write_header(name, 0, '2', target, 0777);
}

Bytes TarWriter::finish() {
    if (!finished_) {
        out_.resize(out_.size() + 2 * kBlock, 0);
        finished_ = true;
    }
    return out_;
}

}  // namespace bdiff
