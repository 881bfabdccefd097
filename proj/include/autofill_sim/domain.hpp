#pragma once

#include <compare>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autofill_sim {

// Ordered set of DNS-style suffixes used for registrable-domain comparison.
// Deliberately tiny; scenes may extend it but never shrink the builtin set.
class SuffixList {
public:
    static const SuffixList& builtin();

    SuffixList();
    explicit SuffixList(std::vector<std::string> extra_suffixes);

    void add(std::string_view suffix);
    bool contains(const std::vector<std::string>& labels) const;

    // True when `label` alone is a suffix label ("com", "org", ...).
    bool is_suffix_label(std::string_view label) const;

    const std::set<std::vector<std::string>>& entries() const { return entries_; }

private:
    std::set<std::vector<std::string>> entries_;
};

// A DNS name as an ordered list of lowercase labels, most-specific first.
class DomainName {
public:
    DomainName() = default;
    explicit DomainName(std::vector<std::string> labels);

    // Parses "walmart.com" style text; throws InvariantError on bad labels.
    static DomainName parse(std::string_view text);

    const std::vector<std::string>& labels() const { return labels_; }
    std::string str() const;

    // Trailing portion that identifies the registrable domain under `suffixes`:
    // the longest known public suffix plus one label.
    DomainName registrable(const SuffixList& suffixes = SuffixList::builtin()) const;

    bool same_registrable(const DomainName& other,
                          const SuffixList& suffixes = SuffixList::builtin()) const;

    bool operator==(const DomainName& other) const { return labels_ == other.labels_; }
    auto operator<=>(const DomainName& other) const { return labels_ <=> other.labels_; }

private:
    std::vector<std::string> labels_;
};

std::ostream& operator<<(std::ostream& os, const DomainName& d);

// Transport security of a connection as observed by the autofill machinery.
struct ConnectionSecurity {
    enum class Kind { HttpsValid, HttpsInvalidCert, Http };

    Kind kind = Kind::HttpsValid;
    std::string invalid_reason;  // only meaningful for HttpsInvalidCert

    static ConnectionSecurity https() { return {Kind::HttpsValid, {}}; }
    static ConnectionSecurity http() { return {Kind::Http, {}}; }
    static ConnectionSecurity bad_cert(std::string reason = "self-signed") {
        return {Kind::HttpsInvalidCert, std::move(reason)};
    }

    bool operator==(const ConnectionSecurity& other) const { return kind == other.kind; }
};

std::string to_string(ConnectionSecurity::Kind kind);

struct Origin {
    DomainName domain;
    ConnectionSecurity security;

    // Same-origin means identical labels and identical security kind; a page
    // with a broken certificate is never same-origin with the valid one.
    bool same_origin(const Origin& other) const {
        return domain == other.domain && security == other.security;
    }

    std::string str() const;

    bool operator==(const Origin& other) const {
        return domain == other.domain && security == other.security;
    }
};

std::ostream& operator<<(std::ostream& os, const Origin& o);

// Wrapper that keeps passwords out of accidental renderings. The value is
// reachable only through reveal(); operator<< prints a fixed placeholder.
class Secret {
public:
    Secret() = default;
    explicit Secret(std::string value) : value_(std::move(value)) {}

    const std::string& reveal() const { return value_; }
    bool operator==(const Secret& other) const { return value_ == other.value_; }

private:
    std::string value_;
};

inline std::ostream& operator<<(std::ostream& os, const Secret&) { return os << "<redacted>"; }

struct Credential {
    std::string id;
    std::string username;
    Secret password;
    DomainName mapped_domain;

    bool operator==(const Credential& other) const {
        return id == other.id && username == other.username && password == other.password &&
               mapped_domain == other.mapped_domain;
    }
};

struct Vault {
    std::vector<Credential> credentials;
    // (package id, domain) pairs the user wired up by hand.
    std::vector<std::pair<std::string, DomainName>> manual_app_mappings;

    bool operator==(const Vault& other) const = default;
};

struct StoreMetadata {
    DomainName developer_website;

    bool operator==(const StoreMetadata& other) const = default;
};

struct AppIdentity {
    std::string package_id;           // dotted, e.g. "com.walmart.app"
    std::string signing_fingerprint;  // 64 lowercase hex chars
    std::vector<DomainName> entitled_domains;
    std::optional<StoreMetadata> store_metadata;

    bool operator==(const AppIdentity& other) const = default;
};

// Validation helpers shared by the scene loader and the unit tests.
bool is_valid_package_id(std::string_view package_id);
bool is_valid_fingerprint(std::string_view fingerprint);
void validate_app_identity(const AppIdentity& app);

// SHA-256 of the UTF-8 bytes of a signing-key label, lowercase hex. Signing
// keys are simulated as labels; equality of fingerprints is all that matters.
std::string fingerprint(std::string_view signing_key_label);

// Credentials whose mapped domain matches the origin's registrable domain.
// Purely a vault filter: connection security is not consulted here, and the
// result is ordered by credential id.
std::vector<Credential> credentials_for_domain(const Vault& vault, const Origin& origin,
                                               const SuffixList& suffixes = SuffixList::builtin());

}  // namespace autofill_sim
