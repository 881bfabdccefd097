#include "autofill_sim/scene.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

using nlohmann::json;

std::string to_string(UserAgent ua) {
    return ua == UserAgent::AlwaysApprove ? "always-approve" : "always-deny";
}

std::string to_string(AssociationPlatform p) {
    return p == AssociationPlatform::AppleStyle ? "apple" : "dal";
}

SuffixList Scene::suffixes() const {
    SuffixList list = SuffixList::builtin();
    for (const auto& s : public_suffixes) list.add(s);
    return list;
}

const AppIdentity* Scene::find_app(const std::string& package_id) const {
    for (const auto& app : apps) {
        if (app.package_id == package_id) return &app;
    }
    return nullptr;
}

const DocumentSource* Scene::find_document(const DomainName& domain,
                                           const std::string& path) const {
    auto it = domains.find(domain);
    if (it == domains.end()) return nullptr;
    auto doc_it = it->second.documents.find(path);
    if (doc_it == it->second.documents.end()) return nullptr;
    return &doc_it->second;
}

const AssociationSource* Scene::find_association(const DomainName& domain) const {
    auto it = domains.find(domain);
    if (it == domains.end() || !it->second.association) return nullptr;
    return &*it->second.association;
}

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw SchemaError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
    if (!obj.is_object()) schema_fail(where, "expected an object");
    for (const char* key : required) {
        if (!obj.contains(key)) schema_fail(where, std::string("missing key \"") + key + "\"");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        bool known = false;
        for (const char* k : required) known = known || key == k;
        for (const char* k : optional) known = known || key == k;
        if (!known) schema_fail(where, "unknown key \"" + key + "\"");
    }
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
    if (!obj[key].is_string()) schema_fail(where, std::string("\"") + key + "\" must be a string");
    return obj[key].get<std::string>();
}

ConnectionSecurity parse_security(const json& v, const std::string& where) {
    if (!v.is_string()) schema_fail(where, "security must be a string");
    std::string s = v.get<std::string>();
    if (s == "https-valid") return ConnectionSecurity::https();
    if (s == "https-invalid-cert") return ConnectionSecurity::bad_cert();
    if (s == "http") return ConnectionSecurity::http();
    schema_fail(where, "security must be https-valid, https-invalid-cert, or http");
}

DomainName parse_domain(const json& v, const std::string& where) {
    if (!v.is_string()) schema_fail(where, "expected a domain string");
    return DomainName::parse(v.get<std::string>());
}

UrlParts parse_url_field(const json& v, const std::string& where) {
    if (!v.is_string()) schema_fail(where, "expected a url string");
    return parse_url(v.get<std::string>());
}

Field field_from_json(const json& j, const std::string& where) {
    require_keys(j, where, {"name", "kind"}, {"type", "visible", "autocomplete_off", "value"});
    Field f;
    f.name = get_string(j, where, "name");
    std::string kind = get_string(j, where, "kind");
    if (kind == "username")
        f.kind = FieldKind::Username;
    else if (kind == "password")
        f.kind = FieldKind::Password;
    else if (kind == "text")
        f.kind = FieldKind::Text;
    else if (kind == "other")
        f.kind = FieldKind::Other;
    else
        schema_fail(where, "kind must be username, password, text, or other");
    if (j.contains("type")) {
        if (f.kind != FieldKind::Other) schema_fail(where, "\"type\" is only valid with kind other");
        f.other_type = get_string(j, where, "type");
    }
    if (j.contains("visible")) {
        if (!j["visible"].is_boolean()) schema_fail(where, "visible must be a boolean");
        f.visible = j["visible"].get<bool>();
    }
    if (j.contains("autocomplete_off")) {
        if (!j["autocomplete_off"].is_boolean())
            schema_fail(where, "autocomplete_off must be a boolean");
        f.autocomplete_off = j["autocomplete_off"].get<bool>();
    }
    if (j.contains("value")) f.value = get_string(j, where, "value");
    return f;
}

json field_to_json(const Field& f) {
    json j;
    j["name"] = f.name;
    j["kind"] = to_string(f.kind);
    if (f.kind == FieldKind::Other) j["type"] = f.other_type;
    if (!f.visible) j["visible"] = false;
    if (f.autocomplete_off) j["autocomplete_off"] = true;
    if (f.value) j["value"] = *f.value;
    return j;
}

ScriptEvent script_from_json(const json& j, const std::string& where) {
    require_keys(j, where, {"phase", "action"}, {"to", "form", "channel", "by"});
    ScriptEvent ev;
    std::string phase = get_string(j, where, "phase");
    if (phase == "onload")
        ev.phase = ScriptPhase::OnLoad;
    else if (phase == "prefill")
        ev.phase = ScriptPhase::PreFill;
    else if (phase == "postfill")
        ev.phase = ScriptPhase::PostFill;
    else
        schema_fail(where, "phase must be onload, prefill, or postfill");

    std::string action = get_string(j, where, "action");
    auto need = [&](const char* key) {
        if (!j.contains(key))
            schema_fail(where, "action " + action + " needs \"" + key + "\"");
    };
    if (action == "rewrite-action") {
        ev.action = ScriptAction::RewriteAction;
        need("to");
        need("form");
        auto url = parse_url_field(j["to"], where);
        ev.to_origin = url.origin;
        ev.to_path = url.path;
    } else if (action == "scrape-fields") {
        ev.action = ScriptAction::ScrapeFields;
        need("form");
    } else if (action == "exfiltrate-to") {
        ev.action = ScriptAction::ExfiltrateTo;
        need("to");
        auto url = parse_url_field(j["to"], where);
        ev.to_origin = url.origin;
        ev.to_path = url.path;
    } else if (action == "post-to-bridge") {
        ev.action = ScriptAction::PostToBridge;
        need("channel");
        ev.channel = get_string(j, where, "channel");
    } else {
        schema_fail(where, "unknown script action \"" + action + "\"");
    }

    if (j.contains("form")) {
        if (!j["form"].is_number_unsigned()) schema_fail(where, "form must be an index");
        ev.form_index = j["form"].get<std::size_t>();
    }
    if (j.contains("by")) {
        std::string by = get_string(j, where, "by");
        if (by == "page")
            ev.injected_by = ScriptOrigin::Page;
        else if (by == "host-app")
            ev.injected_by = ScriptOrigin::HostApp;
        else
            schema_fail(where, "by must be page or host-app");
    }
    return ev;
}

json script_to_json(const ScriptEvent& ev) {
    json j;
    j["phase"] = to_string(ev.phase);
    j["action"] = to_string(ev.action);
    switch (ev.action) {
        case ScriptAction::RewriteAction:
            j["to"] = render_url(ev.to_origin, ev.to_path);
            j["form"] = ev.form_index;
            break;
        case ScriptAction::ScrapeFields: j["form"] = ev.form_index; break;
        case ScriptAction::ExfiltrateTo: j["to"] = render_url(ev.to_origin, ev.to_path); break;
        case ScriptAction::PostToBridge: j["channel"] = ev.channel; break;
    }
    if (ev.injected_by == ScriptOrigin::HostApp) j["by"] = "host-app";
    return j;
}

}  // namespace

Document document_from_json(const json& j, const Origin& origin) {
    const std::string where = "document";
    require_keys(j, where, {}, {"forms", "frames", "scripts"});
    Document doc;
    doc.origin = origin;
    if (j.contains("forms")) {
        if (!j["forms"].is_array()) schema_fail(where, "forms must be an array");
        for (const auto& fj : j["forms"]) {
            require_keys(fj, "form", {"action", "method", "fields"}, {});
            Form form;
            auto url = parse_url_field(fj["action"], "form");
            form.action_origin = url.origin;
            form.action_path = url.path;
            std::string method = get_string(fj, "form", "method");
            if (method == "get")
                form.method = Method::Get;
            else if (method == "post")
                form.method = Method::Post;
            else
                schema_fail("form", "method must be get or post");
            if (!fj["fields"].is_array() || fj["fields"].empty())
                schema_fail("form", "fields must be a non-empty array");
            for (const auto& fieldj : fj["fields"]) form.fields.push_back(field_from_json(fieldj, "field"));
            doc.forms.push_back(std::move(form));
        }
    }
    if (j.contains("frames")) {
        if (!j["frames"].is_array()) schema_fail(where, "frames must be an array");
        for (const auto& frj : j["frames"]) {
            require_keys(frj, "frame", {"src"}, {});
            auto url = parse_url_field(frj["src"], "frame");
            Frame frame;
            frame.origin = url.origin;
            frame.path = url.path;
            frame.doc.origin = url.origin;
            doc.frames.push_back(std::move(frame));
        }
    }
    if (j.contains("scripts")) {
        if (!j["scripts"].is_array()) schema_fail(where, "scripts must be an array");
        for (const auto& sj : j["scripts"]) doc.scripts.push_back(script_from_json(sj, "script"));
    }
    return doc;
}

json document_to_json(const Document& doc) {
    json j = json::object();
    if (!doc.forms.empty()) {
        json forms = json::array();
        for (const auto& form : doc.forms) {
            json fj;
            fj["action"] = render_url(form.action_origin, form.action_path);
            fj["method"] = to_string(form.method);
            json fields = json::array();
            for (const auto& field : form.fields) fields.push_back(field_to_json(field));
            fj["fields"] = std::move(fields);
            forms.push_back(std::move(fj));
        }
        j["forms"] = std::move(forms);
    }
    if (!doc.frames.empty()) {
        json frames = json::array();
        for (const auto& frame : doc.frames) {
            frames.push_back(json{{"src", render_url(frame.origin, frame.path)}});
        }
        j["frames"] = std::move(frames);
    }
    if (!doc.scripts.empty()) {
        json scripts = json::array();
        for (const auto& ev : doc.scripts) scripts.push_back(script_to_json(ev));
        j["scripts"] = std::move(scripts);
    }
    return j;
}

namespace {

// Instantiates a document source's content at a concrete origin. Frames stay
// unresolved placeholders here; link_frames fills them in.
Document instantiate(const DocumentSource& src, const Origin& origin) {
    if (src.kind == DocumentSource::Kind::Html) return parse_document(src.html, origin);
    return document_from_json(src.structured, origin);
}

void link_frames(Document& doc, const Scene& scene, std::size_t depth) {
    if (depth > 8) throw InvariantError("frame nesting exceeds depth 8");
    for (auto& frame : doc.frames) {
        const DocumentSource* src = scene.find_document(frame.origin.domain, frame.path);
        if (!src)
            throw ReferenceError("frame references undeclared document " +
                                 render_url(frame.origin, frame.path));
        frame.doc = instantiate(*src, frame.origin);
        link_frames(frame.doc, scene, depth + 1);
    }
}

Vault vault_from_json(const json& j) {
    require_keys(j, "vault", {"credentials"}, {"manual_app_mappings"});
    Vault vault;
    if (!j["credentials"].is_array()) schema_fail("vault", "credentials must be an array");
    std::set<std::string> seen_ids;
    for (const auto& cj : j["credentials"]) {
        require_keys(cj, "credential", {"id", "username", "password", "domain"}, {});
        Credential cred;
        cred.id = get_string(cj, "credential", "id");
        cred.username = get_string(cj, "credential", "username");
        cred.password = Secret(get_string(cj, "credential", "password"));
        cred.mapped_domain = parse_domain(cj["domain"], "credential");
        if (!seen_ids.insert(cred.id).second)
            throw InvariantError("duplicate credential id \"" + cred.id + "\"");
        vault.credentials.push_back(std::move(cred));
    }
    if (j.contains("manual_app_mappings")) {
        if (!j["manual_app_mappings"].is_array())
            schema_fail("vault", "manual_app_mappings must be an array");
        for (const auto& mj : j["manual_app_mappings"]) {
            require_keys(mj, "manual mapping", {"package", "domain"}, {});
            vault.manual_app_mappings.emplace_back(get_string(mj, "manual mapping", "package"),
                                                   parse_domain(mj["domain"], "manual mapping"));
        }
    }
    return vault;
}

AppIdentity app_from_json(const json& j) {
    require_keys(j, "app", {"package"},
                 {"signing_key", "fingerprint", "entitled_domains", "store_metadata"});
    AppIdentity app;
    app.package_id = get_string(j, "app", "package");
    bool has_key = j.contains("signing_key");
    bool has_fp = j.contains("fingerprint");
    if (has_key == has_fp)
        schema_fail("app " + app.package_id, "needs exactly one of signing_key or fingerprint");
    if (has_key)
        app.signing_fingerprint = fingerprint(get_string(j, "app", "signing_key"));
    else
        app.signing_fingerprint = get_string(j, "app", "fingerprint");
    if (j.contains("entitled_domains")) {
        if (!j["entitled_domains"].is_array())
            schema_fail("app " + app.package_id, "entitled_domains must be an array");
        for (const auto& dj : j["entitled_domains"])
            app.entitled_domains.push_back(parse_domain(dj, "app " + app.package_id));
    }
    if (j.contains("store_metadata")) {
        require_keys(j["store_metadata"], "store_metadata", {"developer_website"}, {});
        app.store_metadata =
            StoreMetadata{parse_domain(j["store_metadata"]["developer_website"], "store_metadata")};
    }
    validate_app_identity(app);
    return app;
}

DomainEntry domain_entry_from_json(const json& j, const std::string& where) {
    require_keys(j, where, {}, {"association", "documents"});
    DomainEntry entry;
    if (j.contains("association")) {
        const json& aj = j["association"];
        require_keys(aj, where + " association", {"platform", "body", "security"}, {});
        AssociationSource assoc;
        std::string platform = get_string(aj, where, "platform");
        if (platform == "apple")
            assoc.platform = AssociationPlatform::AppleStyle;
        else if (platform == "dal")
            assoc.platform = AssociationPlatform::DalStyle;
        else
            schema_fail(where, "association platform must be apple or dal");
        assoc.body = get_string(aj, where, "body");
        assoc.security = parse_security(aj["security"], where);
        entry.association = std::move(assoc);
    }
    if (j.contains("documents")) {
        if (!j["documents"].is_object()) schema_fail(where, "documents must be an object");
        for (auto it = j["documents"].begin(); it != j["documents"].end(); ++it) {
            const std::string& path = it.key();
            if (path.empty() || path[0] != '/')
                schema_fail(where, "document path \"" + path + "\" must start with /");
            const json& dj = it.value();
            std::string doc_where = where + " " + path;
            require_keys(dj, doc_where, {"security"}, {"html", "structured"});
            DocumentSource src;
            src.security = parse_security(dj["security"], doc_where);
            bool has_html = dj.contains("html");
            bool has_structured = dj.contains("structured");
            if (has_html == has_structured)
                schema_fail(doc_where, "needs exactly one of html or structured");
            if (has_html) {
                src.kind = DocumentSource::Kind::Html;
                src.html = get_string(dj, doc_where, "html");
            } else {
                src.kind = DocumentSource::Kind::Structured;
                src.structured = dj["structured"];
            }
            entry.documents.emplace(path, std::move(src));
        }
    }
    return entry;
}

}  // namespace

Scene load_scene(const std::string& source) {
    json j;
    try {
        j = json::parse(source);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scene is not valid JSON: ") + e.what());
    }
    require_keys(j, "scene", {"vault", "apps", "domains", "user_agent"},
                 {"public_suffixes", "crowdsourced_mappings"});

    Scene scene;
    scene.vault = vault_from_json(j["vault"]);

    if (!j["apps"].is_array()) schema_fail("scene", "apps must be an array");
    std::set<std::string> seen_packages;
    for (const auto& aj : j["apps"]) {
        AppIdentity app = app_from_json(aj);
        if (!seen_packages.insert(app.package_id).second)
            throw InvariantError("duplicate app package id \"" + app.package_id + "\"");
        scene.apps.push_back(std::move(app));
    }

    if (!j["domains"].is_object()) schema_fail("scene", "domains must be an object");
    for (auto it = j["domains"].begin(); it != j["domains"].end(); ++it) {
        DomainName domain = DomainName::parse(it.key());
        scene.domains.emplace(domain,
                              domain_entry_from_json(it.value(), "domain " + it.key()));
    }

    std::string ua = get_string(j, "scene", "user_agent");
    if (ua == "always-approve")
        scene.user_agent = UserAgent::AlwaysApprove;
    else if (ua == "always-deny")
        scene.user_agent = UserAgent::AlwaysDeny;
    else
        schema_fail("scene", "user_agent must be always-approve or always-deny");

    if (j.contains("public_suffixes")) {
        if (!j["public_suffixes"].is_array())
            schema_fail("scene", "public_suffixes must be an array");
        for (const auto& sj : j["public_suffixes"]) {
            if (!sj.is_string()) schema_fail("scene", "public_suffixes entries must be strings");
            scene.public_suffixes.push_back(sj.get<std::string>());
        }
        scene.suffixes();  // validates the entries
    }

    if (j.contains("crowdsourced_mappings")) {
        if (!j["crowdsourced_mappings"].is_object())
            schema_fail("scene", "crowdsourced_mappings must be an object");
        for (auto it = j["crowdsourced_mappings"].begin(); it != j["crowdsourced_mappings"].end();
             ++it) {
            if (!is_valid_package_id(it.key()))
                throw InvariantError("crowdsourced mapping has invalid package id \"" + it.key() +
                                     "\"");
            scene.crowdsourced_mappings.emplace(it.key(),
                                                parse_domain(it.value(), "crowdsourced mapping"));
        }
    }

    // Cross-reference checks.
    for (const auto& [package, domain] : scene.vault.manual_app_mappings) {
        (void)domain;
        if (!scene.find_app(package))
            throw ReferenceError("manual mapping references unknown app \"" + package + "\"");
    }

    // Instantiate documents at their domain origins, then resolve frames.
    for (auto& [domain, entry] : scene.domains) {
        for (auto& [path, src] : entry.documents) {
            (void)path;
            src.parsed = instantiate(src, Origin{domain, src.security});
        }
    }
    for (auto& [domain, entry] : scene.domains) {
        (void)domain;
        for (auto& [path, src] : entry.documents) {
            (void)path;
            link_frames(src.parsed, scene, 1);
            validate_frame_depth(src.parsed);
        }
    }
    return scene;
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureMissingError("cannot open scene file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scene(buf.str());
}

std::string render_scene(const Scene& scene) {
    json j;

    json creds = json::array();
    for (const auto& cred : scene.vault.credentials) {
        creds.push_back(json{{"id", cred.id},
                             {"username", cred.username},
                             {"password", cred.password.reveal()},
                             {"domain", cred.mapped_domain.str()}});
    }
    json vault;
    vault["credentials"] = std::move(creds);
    if (!scene.vault.manual_app_mappings.empty()) {
        json mappings = json::array();
        for (const auto& [package, domain] : scene.vault.manual_app_mappings)
            mappings.push_back(json{{"package", package}, {"domain", domain.str()}});
        vault["manual_app_mappings"] = std::move(mappings);
    }
    j["vault"] = std::move(vault);

    json apps = json::array();
    for (const auto& app : scene.apps) {
        json aj;
        aj["package"] = app.package_id;
        aj["fingerprint"] = app.signing_fingerprint;
        if (!app.entitled_domains.empty()) {
            json domains = json::array();
            for (const auto& d : app.entitled_domains) domains.push_back(d.str());
            aj["entitled_domains"] = std::move(domains);
        }
        if (app.store_metadata)
            aj["store_metadata"] =
                json{{"developer_website", app.store_metadata->developer_website.str()}};
        apps.push_back(std::move(aj));
    }
    j["apps"] = std::move(apps);

    json domains = json::object();
    for (const auto& [domain, entry] : scene.domains) {
        json dj = json::object();
        if (entry.association) {
            dj["association"] = json{{"platform", to_string(entry.association->platform)},
                                     {"body", entry.association->body},
                                     {"security", to_string(entry.association->security.kind)}};
        }
        if (!entry.documents.empty()) {
            json docs = json::object();
            for (const auto& [path, src] : entry.documents) {
                json sj;
                sj["security"] = to_string(src.security.kind);
                if (src.kind == DocumentSource::Kind::Html)
                    sj["html"] = src.html;
                else
                    sj["structured"] = src.structured;
                docs[path] = std::move(sj);
            }
            dj["documents"] = std::move(docs);
        }
        domains[domain.str()] = std::move(dj);
    }
    j["domains"] = std::move(domains);

    j["user_agent"] = to_string(scene.user_agent);
    if (!scene.public_suffixes.empty()) j["public_suffixes"] = scene.public_suffixes;
    if (!scene.crowdsourced_mappings.empty()) {
        json cs = json::object();
        for (const auto& [package, domain] : scene.crowdsourced_mappings)
            cs[package] = domain.str();
        j["crowdsourced_mappings"] = std::move(cs);
    }

    return j.dump(2) + "\n";
}

}  // namespace autofill_sim
