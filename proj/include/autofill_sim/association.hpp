#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autofill_sim/domain.hpp"
#include "autofill_sim/scene.hpp"

namespace autofill_sim {

struct SiteAssociationFile {
    AssociationPlatform platform = AssociationPlatform::DalStyle;
    std::vector<std::pair<std::string, std::string>> entries;  // (package_id, fingerprint)

    std::optional<std::string> fingerprint_for(const std::string& package_id) const;
};

struct MappingScheme {
    enum class Kind {
        Bidirectional,
        StaticTable,
        PackageInversion,
        Substring,
        Prefix,
        DalOnly,
        DevWebsite,
        Manual,
        AllowlistWithFingerprint,
    };

    Kind kind = Kind::Manual;
    // StaticTable lookup, and PackageInversion's alternate mapping.
    std::map<std::string, DomainName> table;
    // AllowlistWithFingerprint: (package id, signing fingerprint) -> domain.
    std::map<std::pair<std::string, std::string>, DomainName> fingerprint_table;
    // Consult the scene's crowdsourced table after the primary heuristic.
    bool crowdsourced = false;
};

std::string to_string(MappingScheme::Kind kind);
std::optional<MappingScheme::Kind> parse_scheme_kind(std::string_view text);

struct MappingVerdict {
    enum class Decision { Verified, NotVerified, UserConfirmRequired };

    Decision decision = Decision::NotVerified;
    std::string reason;  // NotVerified only
    std::vector<DomainName> matched_domains;

    static MappingVerdict verified(std::vector<DomainName> domains);
    static MappingVerdict not_verified(std::string reason);
    static MappingVerdict confirm(std::vector<DomainName> domains);
};

std::string to_string(MappingVerdict::Decision d);

// Reason strings for the four bidirectional clauses, reused by tests.
inline constexpr const char* kReasonEntitlementMissing = "app-entitlement-missing";
inline constexpr const char* kReasonAssociationMissing = "association-entry-missing";
inline constexpr const char* kReasonFingerprintMismatch = "fingerprint-mismatch";
inline constexpr const char* kReasonFetchInsecure = "association-fetch-insecure";
inline constexpr const char* kReasonNoHeuristicMatch = "no-heuristic-match";

SiteAssociationFile parse_association_file(AssociationPlatform platform, const std::string& text);

MappingVerdict verify_bidirectional(const AppIdentity& app, const DomainName& domain,
                                    const std::optional<SiteAssociationFile>& assoc,
                                    const ConnectionSecurity& fetched_over);

// Convenience: bidirectional verdict against the association file the scene
// hosts for `domain` (missing or unparseable files count as absent).
MappingVerdict verify_bidirectional_in_scene(const AppIdentity& app, const DomainName& domain,
                                             const Scene& scene);

// The scene parameter supplies what some heuristics read from the outside
// world: hosted DAL files (DalOnly) and the crowdsourced table.
MappingVerdict map_by_heuristic(const MappingScheme& scheme, const AppIdentity& app,
                                const std::vector<DomainName>& known_domains, const Vault& vault,
                                const Scene& scene);

}  // namespace autofill_sim
