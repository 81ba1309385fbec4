#include <doctest.h>

#include "bdiff/android_ab.hpp"
#include "bdiff/contentx.hpp"
#include "bdiff/errors.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/sqlite_util.hpp"
#include "bdiff/tar.hpp"
#include "bdiff/wal.hpp"
#include "oracles.hpp"

using namespace bdiff;

// Parsers over hostile bytes must either succeed or throw a domain error;
// anything else (foreign exceptions, crashes) fails the run contract.
namespace {

enum class Outcome { Parsed, DomainError, ForeignError };

template <typename F>
Outcome probe(F&& f) {
    try {
        f();
        return Outcome::Parsed;
    } catch (const Error&) {
        return Outcome::DomainError;
    } catch (...) {
        return Outcome::ForeignError;
    }
}

Bytes mutate(DeterministicRng& rng, Bytes input) {
    size_t kind = rng.below(4);
    if (input.empty()) kind = 3;
    switch (kind) {
        case 0: {  // flip bytes
            size_t n = 1 + rng.below(8);
            for (size_t i = 0; i < n; ++i)
                input[rng.below(input.size())] ^= uint8_t(1 + rng.below(255));
            return input;
        }
        case 1:  // truncate
            input.resize(rng.below(input.size()));
            return input;
        case 2: {  // splice a window of noise
            size_t at = rng.below(input.size());
            Bytes noise = rng.bytes(1 + rng.below(64), false);
            input.insert(input.begin() + at, noise.begin(), noise.end());
            return input;
        }
        default:
            return rng.bytes(rng.below(512), false);  // pure noise
    }
}

}  // namespace

TEST_CASE("mutated containers never escape the domain error contract") {
    DeterministicRng rng(0xfeedbead);

    // seed corpus: one valid instance per format
    TarWriter tw;
    tw.add_file("apps/p/f/a", std::string_view("alpha"));
    tw.add_file("apps/p/db/b.db", std::string_view("beta"));
    Bytes tar = tw.finish();
    Bytes ab = wrap_android_backup(tar);
    Bytes kv = oracle::kv_stream_reference({{"k1", to_bytes("v1")}, {"k2", to_bytes("v2")}});
    Bytes sms = zlib_compress(to_bytes(std::string(
        R"([{"address":"+1","body":"b","date":1,"date_sent":1,"read":1,"status":0,"type":1,"recipients":"+1"}])")));
    Bytes xml = to_bytes(std::string("<settings><setting name=\"k\" value=\"v\"/></settings>"));
    WalFixture wf = gen_wal_fixture(3);

    for (int i = 0; i < 300; ++i) {
        Bytes t = mutate(rng, tar);
        CHECK(probe([&] {
                  TarReader r(t);
                  while (r.next()) {
                  }
              }) != Outcome::ForeignError);

        Bytes a = mutate(rng, ab);
        CHECK(probe([&] { unwrap_android_backup(a); }) != Outcome::ForeignError);

        Bytes k = mutate(rng, kv);
        CHECK(probe([&] { parse_kv_stream(k); }) != Outcome::ForeignError);

        Bytes s = mutate(rng, sms);
        CHECK(probe([&] { parse_sms_backup(s); }) != Outcome::ForeignError);

        Bytes x = mutate(rng, xml);
        CHECK(probe([&] { parse_settings_xml(x); }) != Outcome::ForeignError);

        Bytes w = mutate(rng, wf.wal);
        CHECK(probe([&] { merge_wal(wf.db, w); }) != Outcome::ForeignError);

        Bytes d = mutate(rng, wf.db);
        // explain never throws at all: damaged inputs degrade to Different
        CHECK(probe([&] {
                  auto v = explain_db_mismatch(d, std::span<const uint8_t>(wf.wal), wf.db);
                  (void)v;
              }) == Outcome::Parsed);
    }
}
