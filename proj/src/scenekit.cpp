#include "autofill_sim/scenekit.hpp"

#include "autofill_sim/domain.hpp"

namespace autofill_sim::scenekit {

using nlohmann::json;

json credential(const std::string& id, const std::string& username, const std::string& password,
                const std::string& domain) {
    return json{{"id", id}, {"username", username}, {"password", password}, {"domain", domain}};
}

json app(const std::string& package, const std::string& signing_key,
         const std::vector<std::string>& entitled_domains,
         const std::string& developer_website) {
    json j{{"package", package}, {"signing_key", signing_key}};
    if (!entitled_domains.empty()) j["entitled_domains"] = entitled_domains;
    if (!developer_website.empty())
        j["store_metadata"] = json{{"developer_website", developer_website}};
    return j;
}

json dal_association(const std::vector<std::pair<std::string, std::string>>& package_and_key,
                     const std::string& security) {
    json body = json::array();
    for (const auto& [package, key] : package_and_key) {
        body.push_back(json{
            {"relation", json::array({"delegate_permission/common.get_login_creds"})},
            {"target",
             json{{"namespace", "android_app"},
                  {"package_name", package},
                  {"sha256_cert_fingerprints", json::array({fingerprint(key)})}}}});
    }
    return json{{"platform", "dal"}, {"body", body.dump()}, {"security", security}};
}

json apple_association(const std::vector<std::pair<std::string, std::string>>& team_and_package,
                       const std::string& security) {
    json details = json::array();
    for (const auto& [team, package] : team_and_package)
        details.push_back(json{{"appID", team + "." + package}});
    json body{{"applinks", json{{"details", details}}}};
    return json{{"platform", "apple"}, {"body", body.dump()}, {"security", security}};
}

json html_document(const std::string& html, const std::string& security) {
    return json{{"html", html}, {"security", security}};
}

json manual_mapping(const std::string& package, const std::string& domain) {
    return json{{"package", package}, {"domain", domain}};
}

std::string login_form_html(const std::string& action_url, const std::string& method) {
    return "<form action=\"" + action_url + "\" method=\"" + method +
           "\">\n"
           "  <input type=\"text\" name=\"username\">\n"
           "  <input type=\"password\" name=\"password\">\n"
           "</form>\n";
}

std::string login_page_html(const std::string& domain) {
    return login_form_html("https://" + domain + "/login");
}

json base_scene_json() {
    json scene;
    scene["vault"] = json{{"credentials",
                           json::array({
                               credential(kHostCred, "shopper", "shop-secret-9", kHostDomain),
                               credential(kVictimCred, "wally", "wal-secret-7", kVictimDomain),
                           })}};
    scene["apps"] = json::array({
        app(kHostApp, kHostKey, {kHostDomain}, kHostDomain),
        app(kVictimApp, kVictimKey, {kVictimDomain}, kVictimDomain),
    });
    scene["domains"] = json{
        {kVictimDomain,
         json{{"association", dal_association({{kVictimApp, kVictimKey}})},
              {"documents", json{{kLoginPath, html_document(login_page_html(kVictimDomain))}}}}},
        {kHostDomain,
         json{{"association", dal_association({{kHostApp, kHostKey}})},
              {"documents", json{{kLoginPath, html_document(login_page_html(kHostDomain))}}}}},
    };
    scene["user_agent"] = "always-approve";
    return scene;
}

Scene load(const json& scene_json) { return load_scene(scene_json.dump()); }

std::vector<ScriptEvent> bridge_scripts(std::size_t form_index, const std::string& channel) {
    ScriptEvent scrape;
    scrape.phase = ScriptPhase::PostFill;
    scrape.action = ScriptAction::ScrapeFields;
    scrape.injected_by = ScriptOrigin::HostApp;
    scrape.form_index = form_index;

    ScriptEvent post;
    post.phase = ScriptPhase::PostFill;
    post.action = ScriptAction::PostToBridge;
    post.injected_by = ScriptOrigin::HostApp;
    post.channel = channel;

    return {scrape, post};
}

}  // namespace autofill_sim::scenekit
