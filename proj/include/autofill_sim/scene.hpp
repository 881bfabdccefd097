#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autofill_sim/domain.hpp"
#include "autofill_sim/webdoc.hpp"

namespace autofill_sim {

enum class UserAgent { AlwaysApprove, AlwaysDeny };

std::string to_string(UserAgent ua);

enum class AssociationPlatform { AppleStyle, DalStyle };

std::string to_string(AssociationPlatform p);

// Raw association file as hosted by a domain, plus how it was served.
struct AssociationSource {
    AssociationPlatform platform = AssociationPlatform::DalStyle;
    std::string body;
    ConnectionSecurity security;

    bool operator==(const AssociationSource&) const = default;
};

struct DocumentSource {
    enum class Kind { Html, Structured };

    Kind kind = Kind::Html;
    std::string html;           // Kind::Html
    nlohmann::json structured;  // Kind::Structured
    ConnectionSecurity security;
    Document parsed;  // instantiated and frame-linked by load_scene

    bool operator==(const DocumentSource& other) const {
        return kind == other.kind && html == other.html && structured == other.structured &&
               security == other.security && parsed == other.parsed;
    }
};

struct DomainEntry {
    std::optional<AssociationSource> association;
    std::map<std::string, DocumentSource> documents;  // path -> source

    bool operator==(const DomainEntry&) const = default;
};

struct Scene {
    Vault vault;
    std::vector<AppIdentity> apps;
    std::map<DomainName, DomainEntry> domains;
    UserAgent user_agent = UserAgent::AlwaysApprove;
    std::vector<std::string> public_suffixes;  // extensions over the builtin list
    std::map<std::string, DomainName> crowdsourced_mappings;  // package -> domain

    SuffixList suffixes() const;
    const AppIdentity* find_app(const std::string& package_id) const;
    const DocumentSource* find_document(const DomainName& domain, const std::string& path) const;
    const AssociationSource* find_association(const DomainName& domain) const;

    bool operator==(const Scene&) const = default;
};

Scene load_scene(const std::string& source);
Scene load_scene_file(const std::string& path);
std::string render_scene(const Scene& scene);

// Structured-document form used inside scene files (no origin key: the
// origin comes from the enclosing domain entry or frame src).
Document document_from_json(const nlohmann::json& j, const Origin& origin);
nlohmann::json document_to_json(const Document& doc);

}  // namespace autofill_sim
