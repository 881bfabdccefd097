#include "autofill_sim/domain.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <sstream>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

namespace {

bool is_label_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

bool is_valid_label(std::string_view label) {
    if (label.empty()) return false;
    return std::all_of(label.begin(), label.end(), is_label_char);
}

std::vector<std::string> split_labels(std::string_view text) {
    std::vector<std::string> labels;
    std::string current;
    for (char c : text) {
        if (c == '.') {
            labels.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    labels.push_back(current);
    return labels;
}

}  // namespace

SuffixList::SuffixList() = default;

SuffixList::SuffixList(std::vector<std::string> extra_suffixes) {
    for (const auto& s : extra_suffixes) add(s);
}

const SuffixList& SuffixList::builtin() {
    static const SuffixList instance = [] {
        SuffixList list;
        for (const char* s :
             {"com", "org", "net", "edu", "gov", "io", "co.uk", "org.uk", "ac.uk", "com.au"}) {
            list.add(s);
        }
        return list;
    }();
    return instance;
}

void SuffixList::add(std::string_view suffix) {
    auto labels = split_labels(suffix);
    for (const auto& label : labels) {
        if (!is_valid_label(label))
            throw InvariantError("invalid suffix label in \"" + std::string(suffix) + "\"");
    }
    entries_.insert(std::move(labels));
}

bool SuffixList::contains(const std::vector<std::string>& labels) const {
    return entries_.count(labels) > 0;
}

bool SuffixList::is_suffix_label(std::string_view label) const {
    return contains({std::string(label)});
}

DomainName::DomainName(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw InvariantError("domain name needs at least one label");
    for (const auto& label : labels_) {
        if (!is_valid_label(label)) throw InvariantError("invalid domain label \"" + label + "\"");
    }
}

DomainName DomainName::parse(std::string_view text) {
    if (text.empty()) throw InvariantError("empty domain name");
    return DomainName(split_labels(text));
}

std::string DomainName::str() const {
    std::string out;
    for (size_t i = 0; i < labels_.size(); ++i) {
        if (i) out.push_back('.');
        out += labels_[i];
    }
    return out;
}

DomainName DomainName::registrable(const SuffixList& suffixes) const {
    // Longest matching suffix wins; "www.example.co.uk" keeps "example.co.uk".
    size_t n = labels_.size();
    size_t best_suffix_len = 0;
    for (size_t len = 1; len < n; ++len) {
        std::vector<std::string> tail(labels_.end() - static_cast<long>(len), labels_.end());
        if (suffixes.contains(tail)) best_suffix_len = len;
    }
    if (best_suffix_len == 0) {
        // Unknown suffix: fall back to the last two labels (or the whole name).
        size_t keep = std::min<size_t>(2, n);
        return DomainName(
            std::vector<std::string>(labels_.end() - static_cast<long>(keep), labels_.end()));
    }
    size_t keep = std::min(best_suffix_len + 1, n);
    return DomainName(
        std::vector<std::string>(labels_.end() - static_cast<long>(keep), labels_.end()));
}

bool DomainName::same_registrable(const DomainName& other, const SuffixList& suffixes) const {
    return registrable(suffixes) == other.registrable(suffixes);
}

std::ostream& operator<<(std::ostream& os, const DomainName& d) { return os << d.str(); }

std::string to_string(ConnectionSecurity::Kind kind) {
    switch (kind) {
        case ConnectionSecurity::Kind::HttpsValid: return "https-valid";
        case ConnectionSecurity::Kind::HttpsInvalidCert: return "https-invalid-cert";
        case ConnectionSecurity::Kind::Http: return "http";
    }
    return "unknown";
}

std::string Origin::str() const {
    std::string scheme;
    switch (security.kind) {
        case ConnectionSecurity::Kind::HttpsValid: scheme = "https"; break;
        case ConnectionSecurity::Kind::HttpsInvalidCert: scheme = "https!"; break;
        case ConnectionSecurity::Kind::Http: scheme = "http"; break;
    }
    return scheme + "://" + domain.str();
}

std::ostream& operator<<(std::ostream& os, const Origin& o) { return os << o.str(); }

bool is_valid_package_id(std::string_view package_id) {
    // Dotted sequence of [a-z0-9_]+ labels with at least two labels.
    if (package_id.empty()) return false;
    size_t label_count = 0;
    size_t label_len = 0;
    for (char c : package_id) {
        if (c == '.') {
            if (label_len == 0) return false;
            ++label_count;
            label_len = 0;
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
            ++label_len;
        } else {
            return false;
        }
    }
    if (label_len == 0) return false;
    ++label_count;
    return label_count >= 2;
}

bool is_valid_fingerprint(std::string_view fp) {
    if (fp.size() != 64) return false;
    return std::all_of(fp.begin(), fp.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

void validate_app_identity(const AppIdentity& app) {
    if (!is_valid_package_id(app.package_id))
        throw InvariantError("invalid package id \"" + app.package_id + "\"");
    if (!is_valid_fingerprint(app.signing_fingerprint))
        throw BadFingerprintError("invalid signing fingerprint for " + app.package_id);
}

std::string fingerprint(std::string_view signing_key_label) {
    if (signing_key_label.empty()) throw EmptyLabelError("signing key label must be non-empty");
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(signing_key_label.data(), signing_key_label.size(), digest, &digest_len,
                   EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::vector<Credential> credentials_for_domain(const Vault& vault, const Origin& origin,
                                               const SuffixList& suffixes) {
    std::vector<Credential> out;
    for (const auto& cred : vault.credentials) {
        if (cred.mapped_domain.same_registrable(origin.domain, suffixes)) out.push_back(cred);
    }
    std::sort(out.begin(), out.end(),
              [](const Credential& a, const Credential& b) { return a.id < b.id; });
    return out;
}

}  // namespace autofill_sim
