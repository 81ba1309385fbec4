#pragma once

#include <stdexcept>
#include <string>

namespace bdiff {

/// Base for all tool-domain failures. Subclasses name the condition the
/// pipeline reacts to; the message carries the evidence (entry name, byte
/// offset, ...).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define BDIFF_ERROR(Name)                                            \
    struct Name : Error {                                            \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

BDIFF_ERROR(IOFailure);
BDIFF_ERROR(DigestMismatch);
BDIFF_ERROR(TruncatedArchive);
BDIFF_ERROR(CorruptHeader);
BDIFF_ERROR(NotAndroidBackup);
BDIFF_ERROR(UnsupportedEncryption);
BDIFF_ERROR(CorruptPayload);
BDIFF_ERROR(MissingManifest);
BDIFF_ERROR(CorruptManifest);
BDIFF_ERROR(NotDatabase);
BDIFF_ERROR(RecipeMismatch);
BDIFF_ERROR(WalMismatch);
BDIFF_ERROR(ParseError);
BDIFF_ERROR(NotArchive);
BDIFF_ERROR(TruncatedEntity);
BDIFF_ERROR(CorruptEntity);
BDIFF_ERROR(MalformedDomain);
BDIFF_ERROR(ZeroWeightSum);
BDIFF_ERROR(UnsupportedFormat);
BDIFF_ERROR(InvalidPlan);
BDIFF_ERROR(MappingCollision);

#undef BDIFF_ERROR

}  // namespace bdiff
