#include "autofill_sim/managers.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

namespace detail {
// Defined in the generated managers_data.cpp.
const char* embedded_managers_json();
}  // namespace detail

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!required.contains(key) && !optional.contains(key))
            throw SchemaError(where + ": unknown key \"" + key + "\"");
    }
    for (const std::string& key : required)
        if (!j.contains(key)) throw SchemaError(where + ": missing key \"" + key + "\"");
}

std::string want_string(const json& j, const char* key, const std::string& where) {
    if (!j.at(key).is_string()) throw SchemaError(where + ": \"" + key + "\" must be a string");
    return j.at(key).get<std::string>();
}

MappingScheme parse_scheme(const json& j, const std::string& where) {
    require_keys(j, {"kind"}, {"table", "fingerprint_table", "crowdsourced"}, where);
    MappingScheme scheme;
    auto kind = parse_scheme_kind(want_string(j, "kind", where));
    if (!kind) throw SchemaError(where + ": unknown scheme kind");
    scheme.kind = *kind;
    if (j.contains("table")) {
        if (!j.at("table").is_object()) throw SchemaError(where + ": \"table\" must be an object");
        for (const auto& [package, domain] : j.at("table").items()) {
            if (!is_valid_package_id(package))
                throw SchemaError(where + ": bad package id \"" + package + "\"");
            if (!domain.is_string()) throw SchemaError(where + ": table values must be strings");
            scheme.table.emplace(package, DomainName::parse(domain.get<std::string>()));
        }
    }
    if (j.contains("fingerprint_table")) {
        if (!j.at("fingerprint_table").is_array())
            throw SchemaError(where + ": \"fingerprint_table\" must be an array");
        for (const json& row : j.at("fingerprint_table")) {
            require_keys(row, {"package", "fingerprint", "domain"}, {},
                         where + ".fingerprint_table");
            std::string package = want_string(row, "package", where);
            std::string fp = want_string(row, "fingerprint", where);
            if (!is_valid_package_id(package))
                throw SchemaError(where + ": bad package id \"" + package + "\"");
            if (!is_valid_fingerprint(fp))
                throw SchemaError(where + ": bad fingerprint for \"" + package + "\"");
            scheme.fingerprint_table.emplace(
                std::make_pair(package, fp),
                DomainName::parse(want_string(row, "domain", where)));
        }
    }
    if (j.contains("crowdsourced")) {
        if (!j.at("crowdsourced").is_boolean())
            throw SchemaError(where + ": \"crowdsourced\" must be a boolean");
        scheme.crowdsourced = j.at("crowdsourced").get<bool>();
    }
    return scheme;
}

ManagerProfile parse_profile(const json& j, const std::string& id, const std::string& name,
                             const std::string& where) {
    require_keys(j, {"native_scheme", "webview_policy"}, {"iframe_policy", "warns_on_manual"},
                 where);
    ManagerProfile prof;
    prof.id = id;
    prof.name = name;
    prof.native_scheme = parse_scheme(j.at("native_scheme"), where + ".native_scheme");
    auto wp = parse_webview_policy(want_string(j, "webview_policy", where));
    if (!wp) throw SchemaError(where + ": unknown webview policy");
    prof.webview_policy = *wp;
    if (j.contains("iframe_policy")) {
        auto ip = parse_iframe_policy(want_string(j, "iframe_policy", where));
        if (!ip) throw SchemaError(where + ": unknown iframe policy");
        prof.iframe_policy = *ip;
    }
    if (j.contains("warns_on_manual")) {
        if (!j.at("warns_on_manual").is_boolean())
            throw SchemaError(where + ": \"warns_on_manual\" must be a boolean");
        prof.warns_on_manual = j.at("warns_on_manual").get<bool>();
    }
    return prof;
}

std::vector<ManagerPreset> parse_catalog(const std::string& text) {
    json j = json::parse(text, nullptr, true);
    require_keys(j, {"schema", "managers"}, {}, "managers");
    if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
        throw SchemaError("managers: unsupported schema version");
    if (!j.at("managers").is_array()) throw SchemaError("managers: \"managers\" must be an array");

    std::vector<ManagerPreset> out;
    std::set<std::string> seen;
    for (const json& entry : j.at("managers")) {
        require_keys(entry, {"id", "name", "frameworks"}, {"ios_extensions", "android"},
                     "manager");
        ManagerPreset preset;
        preset.id = want_string(entry, "id", "manager");
        preset.name = want_string(entry, "name", "manager");
        const std::string where = "manager \"" + preset.id + "\"";
        if (!seen.insert(preset.id).second) throw SchemaError(where + ": duplicate id");
        if (!entry.at("frameworks").is_array())
            throw SchemaError(where + ": \"frameworks\" must be an array");
        for (const json& fw : entry.at("frameworks")) {
            if (!fw.is_string()) throw SchemaError(where + ": framework ids must be strings");
            auto policy = parse_policy_id(fw.get<std::string>());
            if (!policy) throw SchemaError(where + ": unknown framework id");
            preset.frameworks.push_back(*policy);
        }
        if (entry.contains("ios_extensions"))
            preset.ios_extensions = parse_profile(entry.at("ios_extensions"), preset.id,
                                                  preset.name, where + ".ios_extensions");
        if (entry.contains("android"))
            preset.android =
                parse_profile(entry.at("android"), preset.id, preset.name, where + ".android");

        // Platform availability must line up with the profiles shipped.
        bool on_ext = std::find(preset.frameworks.begin(), preset.frameworks.end(),
                                PolicyId::IosExtensions) != preset.frameworks.end();
        bool on_android = std::find(preset.frameworks.begin(), preset.frameworks.end(),
                                    PolicyId::AndroidAutofillService) != preset.frameworks.end();
        if (on_ext != preset.ios_extensions.has_value())
            throw SchemaError(where + ": ios-extensions availability and profile disagree");
        if (on_android != preset.android.has_value())
            throw SchemaError(where + ": android availability and profile disagree");
        out.push_back(std::move(preset));
    }
    return out;
}

}  // namespace

const std::vector<ManagerPreset>& manager_presets() {
    static const std::vector<ManagerPreset> catalog = parse_catalog(managers_json_text());
    return catalog;
}

const ManagerPreset* find_manager(const std::string& id) {
    for (const ManagerPreset& preset : manager_presets())
        if (preset.id == id) return &preset;
    return nullptr;
}

bool manager_supports(const ManagerPreset& preset, PolicyId policy) {
    if (policy == PolicyId::SecureModel) return true;  // a model, not a platform
    return std::find(preset.frameworks.begin(), preset.frameworks.end(), policy) !=
           preset.frameworks.end();
}

std::optional<ManagerProfile> profile_for(const ManagerPreset& preset, PolicyId policy) {
    switch (policy) {
        case PolicyId::IosExtensions:
            return preset.ios_extensions;
        case PolicyId::AndroidAutofillService:
            return preset.android;
        case PolicyId::IosPasswordAutofill:
        case PolicyId::SecureModel:
            return std::nullopt;  // nothing is delegated to the manager
    }
    return std::nullopt;
}

const std::string& managers_json_text() {
    static const std::string text = detail::embedded_managers_json();
    return text;
}

}  // namespace autofill_sim
