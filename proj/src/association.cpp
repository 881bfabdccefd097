#include "autofill_sim/association.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

using nlohmann::json;

std::optional<std::string> SiteAssociationFile::fingerprint_for(
    const std::string& package_id) const {
    for (const auto& [package, fp] : entries) {
        if (package == package_id) return fp;
    }
    return std::nullopt;
}

std::string to_string(MappingScheme::Kind kind) {
    switch (kind) {
        case MappingScheme::Kind::Bidirectional: return "bidirectional";
        case MappingScheme::Kind::StaticTable: return "static-table";
        case MappingScheme::Kind::PackageInversion: return "package-inversion";
        case MappingScheme::Kind::Substring: return "substring";
        case MappingScheme::Kind::Prefix: return "prefix";
        case MappingScheme::Kind::DalOnly: return "dal-only";
        case MappingScheme::Kind::DevWebsite: return "dev-website";
        case MappingScheme::Kind::Manual: return "manual";
        case MappingScheme::Kind::AllowlistWithFingerprint: return "allowlist-with-fingerprint";
    }
    return "manual";
}

std::optional<MappingScheme::Kind> parse_scheme_kind(std::string_view text) {
    using K = MappingScheme::Kind;
    for (K kind : {K::Bidirectional, K::StaticTable, K::PackageInversion, K::Substring, K::Prefix,
                   K::DalOnly, K::DevWebsite, K::Manual, K::AllowlistWithFingerprint}) {
        if (to_string(kind) == text) return kind;
    }
    return std::nullopt;
}

MappingVerdict MappingVerdict::verified(std::vector<DomainName> domains) {
    if (domains.empty())
        throw InvariantError("a Verified mapping verdict needs at least one matched domain");
    MappingVerdict v;
    v.decision = Decision::Verified;
    v.matched_domains = std::move(domains);
    return v;
}

MappingVerdict MappingVerdict::not_verified(std::string reason) {
    MappingVerdict v;
    v.decision = Decision::NotVerified;
    v.reason = std::move(reason);
    return v;
}

MappingVerdict MappingVerdict::confirm(std::vector<DomainName> domains) {
    MappingVerdict v;
    v.decision = Decision::UserConfirmRequired;
    v.matched_domains = std::move(domains);
    return v;
}

std::string to_string(MappingVerdict::Decision d) {
    switch (d) {
        case MappingVerdict::Decision::Verified: return "verified";
        case MappingVerdict::Decision::NotVerified: return "not-verified";
        case MappingVerdict::Decision::UserConfirmRequired: return "user-confirm-required";
    }
    return "not-verified";
}

namespace {

std::string normalize_fingerprint(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == ':') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!is_valid_fingerprint(out))
        throw BadFingerprintError("association file fingerprint \"" + raw +
                                  "\" is not 64 hex chars");
    return out;
}

[[noreturn]] void assoc_fail(const std::string& what) {
    throw SchemaError("association file: " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
    if (!obj.is_object()) assoc_fail(where + " must be an object");
    for (const char* key : required) {
        if (!obj.contains(key)) assoc_fail(where + " is missing \"" + key + "\"");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : required) known = known || it.key() == k;
        for (const char* k : optional) known = known || it.key() == k;
        if (!known) assoc_fail(where + " has unknown key \"" + it.key() + "\"");
    }
}

SiteAssociationFile parse_apple(const json& j) {
    SiteAssociationFile file;
    file.platform = AssociationPlatform::AppleStyle;
    check_keys(j, "document", {"applinks"}, {});
    const json& applinks = j["applinks"];
    check_keys(applinks, "applinks", {"details"}, {});
    if (!applinks["details"].is_array()) assoc_fail("applinks.details must be an array");
    for (const json& detail : applinks["details"]) {
        check_keys(detail, "detail", {"appID"}, {"paths"});
        if (!detail["appID"].is_string()) assoc_fail("appID must be a string");
        std::string app_id = detail["appID"].get<std::string>();
        auto dot = app_id.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 >= app_id.size())
            assoc_fail("appID \"" + app_id + "\" must look like TEAMID.package");
        std::string team = app_id.substr(0, dot);
        std::string package = app_id.substr(dot + 1);
        if (!is_valid_package_id(package))
            assoc_fail("appID \"" + app_id + "\" has an invalid package id");
        file.entries.emplace_back(package, fingerprint(team));
    }
    return file;
}

SiteAssociationFile parse_dal(const json& j) {
    SiteAssociationFile file;
    file.platform = AssociationPlatform::DalStyle;
    if (!j.is_array()) assoc_fail("dal file must be a top-level array of statements");
    for (const json& stmt : j) {
        check_keys(stmt, "statement", {"target"}, {"relation"});
        const json& target = stmt["target"];
        check_keys(target, "target", {"package_name", "sha256_cert_fingerprints"}, {"namespace"});
        if (!target["package_name"].is_string()) assoc_fail("package_name must be a string");
        std::string package = target["package_name"].get<std::string>();
        if (!is_valid_package_id(package))
            assoc_fail("package_name \"" + package + "\" is invalid");
        const json& fps = target["sha256_cert_fingerprints"];
        if (!fps.is_array() || fps.size() != 1)
            assoc_fail("sha256_cert_fingerprints must hold exactly one fingerprint");
        if (!fps[0].is_string()) assoc_fail("fingerprints must be strings");
        file.entries.emplace_back(package, normalize_fingerprint(fps[0].get<std::string>()));
    }
    return file;
}

std::vector<DomainName> sorted_unique(std::vector<DomainName> domains) {
    std::sort(domains.begin(), domains.end());
    domains.erase(std::unique(domains.begin(), domains.end()), domains.end());
    return domains;
}

std::vector<std::string> package_components(const std::string& package_id) {
    std::vector<std::string> comps;
    std::string current;
    for (char c : package_id) {
        if (c == '.') {
            comps.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    comps.push_back(current);
    return comps;
}

// "com.walmart.evil" -> "walmart.com" (first two components, reversed).
std::optional<std::string> inverted_prefix(const std::string& package_id) {
    auto comps = package_components(package_id);
    if (comps.size() < 2) return std::nullopt;
    return comps[1] + "." + comps[0];
}

std::vector<DomainName> match_inverted_prefix(const std::string& package_id,
                                              const std::vector<DomainName>& known_domains,
                                              const SuffixList& suffixes) {
    std::vector<DomainName> matched;
    auto inverted = inverted_prefix(package_id);
    if (!inverted) return matched;
    for (const auto& d : known_domains) {
        if (d.registrable(suffixes).str() == *inverted) matched.push_back(d);
    }
    return sorted_unique(std::move(matched));
}

}  // namespace

SiteAssociationFile parse_association_file(AssociationPlatform platform, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("association file is not valid JSON: ") + e.what());
    }
    SiteAssociationFile file =
        platform == AssociationPlatform::AppleStyle ? parse_apple(j) : parse_dal(j);

    std::set<std::string> seen;
    for (const auto& [package, fp] : file.entries) {
        (void)fp;
        if (!seen.insert(package).second)
            throw SchemaError("association file lists package \"" + package + "\" twice");
    }
    return file;
}

MappingVerdict verify_bidirectional(const AppIdentity& app, const DomainName& domain,
                                    const std::optional<SiteAssociationFile>& assoc,
                                    const ConnectionSecurity& fetched_over) {
    bool entitled = std::find(app.entitled_domains.begin(), app.entitled_domains.end(), domain) !=
                    app.entitled_domains.end();
    if (!entitled) return MappingVerdict::not_verified(kReasonEntitlementMissing);

    std::optional<std::string> listed_fp;
    if (assoc) listed_fp = assoc->fingerprint_for(app.package_id);
    if (!listed_fp) return MappingVerdict::not_verified(kReasonAssociationMissing);

    if (*listed_fp != app.signing_fingerprint)
        return MappingVerdict::not_verified(kReasonFingerprintMismatch);

    if (fetched_over.kind != ConnectionSecurity::Kind::HttpsValid)
        return MappingVerdict::not_verified(kReasonFetchInsecure);

    return MappingVerdict::verified({domain});
}

MappingVerdict verify_bidirectional_in_scene(const AppIdentity& app, const DomainName& domain,
                                             const Scene& scene) {
    std::optional<SiteAssociationFile> assoc;
    ConnectionSecurity fetched = ConnectionSecurity::https();
    if (const AssociationSource* src = scene.find_association(domain)) {
        fetched = src->security;
        try {
            assoc = parse_association_file(src->platform, src->body);
        } catch (const Error&) {
            assoc.reset();  // a malformed hosted file counts as absent
        }
    }
    return verify_bidirectional(app, domain, assoc, fetched);
}

MappingVerdict map_by_heuristic(const MappingScheme& scheme, const AppIdentity& app,
                                const std::vector<DomainName>& known_domains, const Vault& vault,
                                const Scene& scene) {
    SuffixList suffixes = scene.suffixes();

    auto manual_verdict = [&]() -> MappingVerdict {
        std::vector<DomainName> matched;
        for (const auto& [package, domain] : vault.manual_app_mappings) {
            if (package == app.package_id) matched.push_back(domain);
        }
        if (!matched.empty()) return MappingVerdict::verified(sorted_unique(std::move(matched)));
        return MappingVerdict::confirm({});
    };

    MappingVerdict primary;
    switch (scheme.kind) {
        case MappingScheme::Kind::Bidirectional:
            throw InvariantError("bidirectional mapping is verified, not matched heuristically");

        case MappingScheme::Kind::StaticTable: {
            auto it = scheme.table.find(app.package_id);
            primary = it == scheme.table.end()
                          ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                          : MappingVerdict::verified({it->second});
            break;
        }

        case MappingScheme::Kind::PackageInversion: {
            // The alternate table covers apps that break the inversion
            // pattern and takes precedence over the inversion itself.
            auto it = scheme.table.find(app.package_id);
            if (it != scheme.table.end()) {
                primary = MappingVerdict::verified({it->second});
                break;
            }
            auto matched = match_inverted_prefix(app.package_id, known_domains, suffixes);
            primary = matched.empty() ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                                      : MappingVerdict::verified(std::move(matched));
            break;
        }

        case MappingScheme::Kind::Prefix: {
            auto matched = match_inverted_prefix(app.package_id, known_domains, suffixes);
            primary = matched.empty() ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                                      : MappingVerdict::verified(std::move(matched));
            break;
        }

        case MappingScheme::Kind::Substring: {
            std::vector<DomainName> matched;
            for (const std::string& comp : package_components(app.package_id)) {
                if (comp.empty()) continue;
                if (suffixes.is_suffix_label(comp)) continue;
                if (comp == "com" || comp == "android" || comp == "app") continue;
                for (const auto& d : known_domains) {
                    if (d.str().find(comp) != std::string::npos) matched.push_back(d);
                }
            }
            matched = sorted_unique(std::move(matched));
            primary = matched.empty() ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                                      : MappingVerdict::verified(std::move(matched));
            break;
        }

        case MappingScheme::Kind::DalOnly: {
            std::vector<DomainName> matched;
            for (const auto& d : known_domains) {
                const AssociationSource* src = scene.find_association(d);
                if (!src || src->platform != AssociationPlatform::DalStyle) continue;
                if (src->security.kind != ConnectionSecurity::Kind::HttpsValid) continue;
                std::optional<SiteAssociationFile> file;
                try {
                    file = parse_association_file(src->platform, src->body);
                } catch (const Error&) {
                    continue;
                }
                auto fp = file->fingerprint_for(app.package_id);
                if (fp && *fp == app.signing_fingerprint) matched.push_back(d);
            }
            matched = sorted_unique(std::move(matched));
            primary = matched.empty() ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                                      : MappingVerdict::verified(std::move(matched));
            break;
        }

        case MappingScheme::Kind::DevWebsite: {
            if (app.store_metadata) {
                primary = MappingVerdict::confirm({app.store_metadata->developer_website});
            } else {
                primary = manual_verdict();  // no store listing: back to manual association
            }
            break;
        }

        case MappingScheme::Kind::AllowlistWithFingerprint: {
            auto it = scheme.fingerprint_table.find({app.package_id, app.signing_fingerprint});
            primary = it == scheme.fingerprint_table.end()
                          ? MappingVerdict::not_verified(kReasonNoHeuristicMatch)
                          : MappingVerdict::verified({it->second});
            break;
        }

        case MappingScheme::Kind::Manual: primary = manual_verdict(); break;
    }

    if (primary.decision == MappingVerdict::Decision::NotVerified && scheme.crowdsourced) {
        auto it = scene.crowdsourced_mappings.find(app.package_id);
        if (it != scene.crowdsourced_mappings.end())
            return MappingVerdict::confirm({it->second});
    }
    return primary;
}

}  // namespace autofill_sim
