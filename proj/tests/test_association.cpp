#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "autofill_sim/association.hpp"
#include "autofill_sim/errors.hpp"
#include "autofill_sim/scenekit.hpp"

using namespace autofill_sim;
namespace sk = autofill_sim::scenekit;
using nlohmann::json;

namespace {

AppIdentity walmart_app() {
    AppIdentity app;
    app.package_id = "com.walmart.app";
    app.signing_fingerprint = fingerprint("walmart-release-key");
    app.entitled_domains = {DomainName::parse("walmart.com")};
    return app;
}

SiteAssociationFile dal_file(const std::string& package, const std::string& key) {
    json stmt = {{"relation", json::array({"delegate_permission/common.get_login_creds"})},
                 {"target",
                  {{"namespace", "android_app"},
                   {"package_name", package},
                   {"sha256_cert_fingerprints", json::array({fingerprint(key)})}}}};
    return parse_association_file(AssociationPlatform::DalStyle, json::array({stmt}).dump());
}

Scene empty_scene() {
    json j;
    j["vault"] = json{{"credentials", json::array()}};
    j["apps"] = json::array();
    j["domains"] = json::object();
    j["user_agent"] = "always-approve";
    return load_scene(j.dump());
}

std::vector<DomainName> domains(std::initializer_list<const char*> names) {
    std::vector<DomainName> out;
    for (const char* n : names) out.push_back(DomainName::parse(n));
    return out;
}

}  // namespace

TEST_CASE("dal files parse package/fingerprint entries") {
    SiteAssociationFile file = dal_file("com.walmart.app", "walmart-release-key");
    REQUIRE(file.entries.size() == 1);
    CHECK(file.entries[0].first == "com.walmart.app");
    CHECK(file.entries[0].second == fingerprint("walmart-release-key"));
    CHECK(file.fingerprint_for("com.walmart.app") == fingerprint("walmart-release-key"));
    CHECK_FALSE(file.fingerprint_for("com.other.app").has_value());
}

TEST_CASE("dal fingerprints normalize colons and case") {
    std::string fp = fingerprint("walmart-release-key");
    std::string colons;
    for (std::size_t i = 0; i < fp.size(); i += 2) {
        if (i) colons += ":";
        colons += static_cast<char>(std::toupper(fp[i]));
        colons += static_cast<char>(std::toupper(fp[i + 1]));
    }
    json stmt = {{"target",
                  {{"package_name", "com.walmart.app"},
                   {"sha256_cert_fingerprints", json::array({colons})}}}};
    SiteAssociationFile file =
        parse_association_file(AssociationPlatform::DalStyle, json::array({stmt}).dump());
    CHECK(file.entries[0].second == fp);
}

TEST_CASE("empty dal file is valid with zero entries") {
    SiteAssociationFile file = parse_association_file(AssociationPlatform::DalStyle, "[]");
    CHECK(file.entries.empty());
}

TEST_CASE("dal parse failures") {
    CHECK_THROWS_AS(parse_association_file(AssociationPlatform::DalStyle, "{"), SchemaError);
    CHECK_THROWS_AS(parse_association_file(AssociationPlatform::DalStyle, "{}"), SchemaError);
    // Odd hex length in a fingerprint.
    json stmt = {{"target",
                  {{"package_name", "com.x.app"},
                   {"sha256_cert_fingerprints", json::array({"abc"})}}}};
    CHECK_THROWS_AS(
        parse_association_file(AssociationPlatform::DalStyle, json::array({stmt}).dump()),
        BadFingerprintError);
    // The same package twice is ambiguous.
    json good = {{"target",
                  {{"package_name", "com.x.app"},
                   {"sha256_cert_fingerprints", json::array({fingerprint("keyA")})}}}};
    json twice = json::array({good, good});
    CHECK_THROWS_AS(parse_association_file(AssociationPlatform::DalStyle, twice.dump()),
                    SchemaError);
}

TEST_CASE("apple files treat the team id as the fingerprint label") {
    json body = {{"applinks",
                  {{"details", json::array({json{{"appID", "walmart-release-key.com.walmart.app"}}})}}}};
    SiteAssociationFile file =
        parse_association_file(AssociationPlatform::AppleStyle, body.dump());
    REQUIRE(file.entries.size() == 1);
    CHECK(file.platform == AssociationPlatform::AppleStyle);
    CHECK(file.entries[0].first == "com.walmart.app");
    CHECK(file.entries[0].second == fingerprint("walmart-release-key"));

    json bad = {{"applinks", {{"details", json::array({json{{"appID", "no-package"}}})}}}};
    CHECK_THROWS_AS(parse_association_file(AssociationPlatform::AppleStyle, bad.dump()),
                    SchemaError);
}

TEST_CASE("bidirectional verification demands all four clauses") {
    AppIdentity app = walmart_app();
    DomainName domain = DomainName::parse("walmart.com");
    auto assoc = dal_file("com.walmart.app", "walmart-release-key");

    MappingVerdict ok = verify_bidirectional(app, domain, assoc, ConnectionSecurity::https());
    CHECK(ok.decision == MappingVerdict::Decision::Verified);
    REQUIRE(ok.matched_domains.size() == 1);
    CHECK(ok.matched_domains[0].str() == "walmart.com");
}

TEST_CASE("all sixteen clause combinations verify only when everything holds") {
    DomainName domain = DomainName::parse("walmart.com");
    for (int mask = 0; mask < 16; ++mask) {
        bool entitled = mask & 1;
        bool listed = mask & 2;
        bool fp_match = mask & 4;
        bool tls = mask & 8;

        AppIdentity app = walmart_app();
        if (!entitled) app.entitled_domains.clear();
        std::optional<SiteAssociationFile> assoc;
        if (listed)
            assoc = dal_file("com.walmart.app",
                             fp_match ? "walmart-release-key" : "attacker-key");
        ConnectionSecurity fetched =
            tls ? ConnectionSecurity::https() : ConnectionSecurity::http();

        MappingVerdict v = verify_bidirectional(app, domain, assoc, fetched);
        CAPTURE(mask);
        if (mask == 15) {
            CHECK(v.decision == MappingVerdict::Decision::Verified);
        } else {
            CHECK(v.decision == MappingVerdict::Decision::NotVerified);
            // The reason names the first clause that failed, in order.
            if (!entitled)
                CHECK(v.reason == kReasonEntitlementMissing);
            else if (!listed)
                CHECK(v.reason == kReasonAssociationMissing);
            else if (!fp_match)
                CHECK(v.reason == kReasonFingerprintMismatch);
            else
                CHECK(v.reason == kReasonFetchInsecure);
        }
    }
}

TEST_CASE("a look-alike app never passes bidirectional verification") {
    // Identical in every observable except the signing key.
    AppIdentity genuine = walmart_app();
    AppIdentity look_alike = genuine;
    look_alike.signing_fingerprint = fingerprint("attacker-key");
    DomainName domain = DomainName::parse("walmart.com");
    auto assoc = dal_file("com.walmart.app", "walmart-release-key");

    for (const ConnectionSecurity& sec :
         {ConnectionSecurity::https(), ConnectionSecurity::http(), ConnectionSecurity::bad_cert()}) {
        MappingVerdict v = verify_bidirectional(look_alike, domain, assoc, sec);
        CHECK(v.decision == MappingVerdict::Decision::NotVerified);
    }
    CHECK(verify_bidirectional(look_alike, domain, assoc, ConnectionSecurity::https()).reason ==
          kReasonFingerprintMismatch);
}

TEST_CASE("fingerprint mutation property: no mutated fixture stays verified") {
    std::mt19937 rng(99);
    for (int i = 0; i < 100; ++i) {
        std::string key = "release-key-" + std::to_string(i);
        std::string package = "com.vendor" + std::to_string(i) + ".app";
        AppIdentity app;
        app.package_id = package;
        app.signing_fingerprint = fingerprint(key);
        app.entitled_domains = {DomainName::parse("vendor.com")};
        auto assoc = dal_file(package, key);
        DomainName domain = DomainName::parse("vendor.com");
        REQUIRE(verify_bidirectional(app, domain, assoc, ConnectionSecurity::https()).decision ==
                MappingVerdict::Decision::Verified);

        AppIdentity mutant = app;
        mutant.signing_fingerprint = fingerprint("mutated-" + std::to_string(rng()));
        MappingVerdict v = verify_bidirectional(mutant, domain, assoc, ConnectionSecurity::https());
        CHECK(v.decision == MappingVerdict::Decision::NotVerified);
        CHECK(v.reason == kReasonFingerprintMismatch);
    }
}

TEST_CASE("verify_bidirectional_in_scene reads the hosted association") {
    json j = sk::base_scene_json();
    Scene scene = load_scene(j.dump());
    AppIdentity genuine = *scene.find_app(sk::kVictimApp);
    CHECK(verify_bidirectional_in_scene(genuine, DomainName::parse(sk::kVictimDomain), scene)
              .decision == MappingVerdict::Decision::Verified);

    // A domain hosting no association file.
    AppIdentity other = genuine;
    other.entitled_domains = {DomainName::parse("nowhere.net")};
    MappingVerdict v =
        verify_bidirectional_in_scene(other, DomainName::parse("nowhere.net"), scene);
    CHECK(v.decision == MappingVerdict::Decision::NotVerified);
    CHECK(v.reason == kReasonAssociationMissing);

    // A malformed hosted file counts as absent, not as a crash.
    json broken = sk::base_scene_json();
    broken["domains"][sk::kVictimDomain]["association"]["body"] = "not json at all";
    Scene broken_scene = load_scene(broken.dump());
    MappingVerdict bv =
        verify_bidirectional_in_scene(genuine, DomainName::parse(sk::kVictimDomain), broken_scene);
    CHECK(bv.decision == MappingVerdict::Decision::NotVerified);
    CHECK(bv.reason == kReasonAssociationMissing);

    // An association served over http fails the transport clause.
    json insecure = sk::base_scene_json();
    insecure["domains"][sk::kVictimDomain]["association"]["security"] = "http";
    Scene insecure_scene = load_scene(insecure.dump());
    CHECK(verify_bidirectional_in_scene(genuine, DomainName::parse(sk::kVictimDomain),
                                        insecure_scene)
              .reason == kReasonFetchInsecure);
}

TEST_CASE("map_by_heuristic rejects the bidirectional kind") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Bidirectional;
    Scene scene = empty_scene();
    CHECK_THROWS_AS(
        map_by_heuristic(scheme, walmart_app(), domains({"walmart.com"}), Vault{}, scene),
        InvariantError);
}

TEST_CASE("prefix heuristic: com.walmart.evil matches walmart.com") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Prefix;
    AppIdentity squat;
    squat.package_id = "com.walmart.evil";
    squat.signing_fingerprint = fingerprint("attacker-key");
    Scene scene = empty_scene();
    MappingVerdict v =
        map_by_heuristic(scheme, squat, domains({"walmart.com", "example.org"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::Verified);
    REQUIRE(v.matched_domains.size() == 1);
    CHECK(v.matched_domains[0].str() == "walmart.com");

    AppIdentity unrelated;
    unrelated.package_id = "org.nobody.tool";
    unrelated.signing_fingerprint = fingerprint("keyA");
    MappingVerdict miss =
        map_by_heuristic(scheme, unrelated, domains({"walmart.com"}), Vault{}, scene);
    CHECK(miss.decision == MappingVerdict::Decision::NotVerified);
    CHECK(miss.reason == kReasonNoHeuristicMatch);
}

TEST_CASE("substring heuristic: com.wal.evil matches walmart.com") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Substring;
    AppIdentity squat;
    squat.package_id = "com.wal.evil";
    squat.signing_fingerprint = fingerprint("attacker-key");
    Scene scene = empty_scene();
    MappingVerdict v =
        map_by_heuristic(scheme, squat, domains({"walmart.com", "shop.org"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::Verified);
    REQUIRE(v.matched_domains.size() == 1);
    CHECK(v.matched_domains[0].str() == "walmart.com");
}

TEST_CASE("substring heuristic skips suffix labels and the common components") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Substring;
    Scene scene = empty_scene();
    // Every component of this package is skippable: com (common + suffix),
    // android/app (common), org (suffix label).
    AppIdentity app;
    app.package_id = "com.android.app";
    app.signing_fingerprint = fingerprint("keyA");
    MappingVerdict v = map_by_heuristic(
        scheme, app, domains({"com-store.com", "android-fans.org", "app.net"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::NotVerified);
}

TEST_CASE("package inversion matches the reversed prefix and honors its table") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::PackageInversion;
    scheme.table["com.mobile.ign"] = DomainName::parse("ign.com");
    Scene scene = empty_scene();

    AppIdentity straight;
    straight.package_id = "com.walmart.app";
    straight.signing_fingerprint = fingerprint("keyA");
    MappingVerdict v =
        map_by_heuristic(scheme, straight, domains({"walmart.com"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::Verified);
    CHECK(v.matched_domains[0].str() == "walmart.com");

    // The alternate table wins over the inversion for listed packages.
    AppIdentity ign;
    ign.package_id = "com.mobile.ign";
    ign.signing_fingerprint = fingerprint("keyB");
    MappingVerdict tv = map_by_heuristic(scheme, ign, domains({"mobile.com"}), Vault{}, scene);
    CHECK(tv.decision == MappingVerdict::Decision::Verified);
    CHECK(tv.matched_domains[0].str() == "ign.com");
}

TEST_CASE("static table maps only listed packages") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::StaticTable;
    scheme.table["com.walmart.app"] = DomainName::parse("walmart.com");
    Scene scene = empty_scene();

    MappingVerdict hit =
        map_by_heuristic(scheme, walmart_app(), domains({"walmart.com"}), Vault{}, scene);
    CHECK(hit.decision == MappingVerdict::Decision::Verified);

    AppIdentity squat;
    squat.package_id = "com.walmart.evil";
    squat.signing_fingerprint = fingerprint("attacker-key");
    MappingVerdict miss =
        map_by_heuristic(scheme, squat, domains({"walmart.com"}), Vault{}, scene);
    CHECK(miss.decision == MappingVerdict::Decision::NotVerified);
}

TEST_CASE("dev-website heuristic asks the user and is lied to easily") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::DevWebsite;
    Scene scene = empty_scene();

    AppIdentity liar;
    liar.package_id = "com.evil.app";
    liar.signing_fingerprint = fingerprint("attacker-key");
    liar.store_metadata = StoreMetadata{DomainName::parse("walmart.com")};
    MappingVerdict v = map_by_heuristic(scheme, liar, domains({"walmart.com"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::UserConfirmRequired);
    REQUIRE(v.matched_domains.size() == 1);
    CHECK(v.matched_domains[0].str() == "walmart.com");

    // Without a store listing it degrades to the manual path.
    AppIdentity unlisted;
    unlisted.package_id = "com.evil.app";
    unlisted.signing_fingerprint = fingerprint("attacker-key");
    MappingVerdict m = map_by_heuristic(scheme, unlisted, domains({"walmart.com"}), Vault{}, scene);
    CHECK(m.decision == MappingVerdict::Decision::UserConfirmRequired);
    CHECK(m.matched_domains.empty());
}

TEST_CASE("dal-only heuristic verifies against hosted files") {
    Scene scene = load_scene(sk::base_scene_json().dump());
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::DalOnly;

    AppIdentity genuine = *scene.find_app(sk::kVictimApp);
    MappingVerdict v = map_by_heuristic(
        scheme, genuine, domains({"walmart.com", "shop.com", "example.org"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::Verified);
    REQUIRE(v.matched_domains.size() == 1);
    CHECK(v.matched_domains[0].str() == "walmart.com");

    AppIdentity impostor = genuine;
    impostor.signing_fingerprint = fingerprint("attacker-key");
    MappingVerdict iv =
        map_by_heuristic(scheme, impostor, domains({"walmart.com"}), Vault{}, scene);
    CHECK(iv.decision == MappingVerdict::Decision::NotVerified);
}

TEST_CASE("allowlist-with-fingerprint pins both package and key") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::AllowlistWithFingerprint;
    scheme.fingerprint_table[{"com.walmart.app", fingerprint("walmart-release-key")}] =
        DomainName::parse("walmart.com");
    Scene scene = empty_scene();

    MappingVerdict hit =
        map_by_heuristic(scheme, walmart_app(), domains({"walmart.com"}), Vault{}, scene);
    CHECK(hit.decision == MappingVerdict::Decision::Verified);

    AppIdentity wrong_key = walmart_app();
    wrong_key.signing_fingerprint = fingerprint("attacker-key");
    CHECK(map_by_heuristic(scheme, wrong_key, domains({"walmart.com"}), Vault{}, scene).decision ==
          MappingVerdict::Decision::NotVerified);
}

TEST_CASE("manual scheme trusts the vault's explicit pairs") {
    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Manual;
    Scene scene = empty_scene();
    Vault vault;
    vault.manual_app_mappings.emplace_back("com.walmart.app", DomainName::parse("walmart.com"));

    MappingVerdict hit =
        map_by_heuristic(scheme, walmart_app(), domains({"walmart.com"}), vault, scene);
    CHECK(hit.decision == MappingVerdict::Decision::Verified);
    CHECK(hit.matched_domains[0].str() == "walmart.com");

    AppIdentity stranger;
    stranger.package_id = "com.new.app";
    stranger.signing_fingerprint = fingerprint("keyA");
    MappingVerdict miss =
        map_by_heuristic(scheme, stranger, domains({"walmart.com"}), vault, scene);
    CHECK(miss.decision == MappingVerdict::Decision::UserConfirmRequired);
    CHECK(miss.matched_domains.empty());
}

TEST_CASE("crowdsourced fallback turns misses into confirmations") {
    json j = sk::base_scene_json();
    j["crowdsourced_mappings"] = json{{"com.fresh.app", "walmart.com"}};
    Scene scene = load_scene(j.dump());

    MappingScheme scheme;
    scheme.kind = MappingScheme::Kind::Prefix;
    scheme.crowdsourced = true;

    AppIdentity fresh;
    fresh.package_id = "com.fresh.app";
    fresh.signing_fingerprint = fingerprint("keyA");
    MappingVerdict v = map_by_heuristic(scheme, fresh, domains({"walmart.com"}), Vault{}, scene);
    CHECK(v.decision == MappingVerdict::Decision::UserConfirmRequired);
    REQUIRE(v.matched_domains.size() == 1);
    CHECK(v.matched_domains[0].str() == "walmart.com");

    // Without the flag the same miss stays a miss.
    scheme.crowdsourced = false;
    CHECK(map_by_heuristic(scheme, fresh, domains({"walmart.com"}), Vault{}, scene).decision ==
          MappingVerdict::Decision::NotVerified);
}

TEST_CASE("heuristics never invent domains outside their inputs") {
    std::mt19937 rng(4242);
    Scene scene = load_scene(sk::base_scene_json().dump());
    std::vector<DomainName> known = domains({"walmart.com", "shop.com", "example.org"});
    const char* packages[] = {"com.walmart.app", "com.wal.evil",  "com.walmart.evil",
                              "com.shop.app",    "org.example.x", "net.random.thing",
                              "com.example.app", "com.shop.evil"};

    for (auto kind : {MappingScheme::Kind::Prefix, MappingScheme::Kind::Substring,
                      MappingScheme::Kind::PackageInversion, MappingScheme::Kind::DalOnly,
                      MappingScheme::Kind::Manual}) {
        MappingScheme scheme;
        scheme.kind = kind;
        for (const char* package : packages) {
            AppIdentity app;
            app.package_id = package;
            app.signing_fingerprint = fingerprint("key-" + std::to_string(rng() % 4));
            MappingVerdict v = map_by_heuristic(scheme, app, known, Vault{}, scene);
            for (const DomainName& d : v.matched_domains)
                CHECK(std::find(known.begin(), known.end(), d) != known.end());
        }
    }
}
