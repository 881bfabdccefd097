#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "autofill_sim/scene.hpp"

namespace autofill_sim::scenekit {

// Canonical names of the demo world shared by fixtures and attack scenarios.
inline constexpr const char* kVictimDomain = "walmart.com";
inline constexpr const char* kHostDomain = "shop.com";
inline constexpr const char* kOtherDomain = "example.org";
inline constexpr const char* kAttackerDomain = "evil.com";
inline constexpr const char* kVictimApp = "com.walmart.app";
inline constexpr const char* kHostApp = "com.shop.app";
inline constexpr const char* kAttackerApp = "com.evil.app";
inline constexpr const char* kVictimCred = "cred-walmart";
inline constexpr const char* kHostCred = "cred-shop";
inline constexpr const char* kOtherCred = "cred-example";
inline constexpr const char* kVictimKey = "walmart-release-key";
inline constexpr const char* kHostKey = "shop-release-key";
inline constexpr const char* kAttackerKey = "attacker-key";
inline constexpr const char* kLoginPath = "/login.html";

// JSON fragments in scene-schema form.
nlohmann::json credential(const std::string& id, const std::string& username,
                          const std::string& password, const std::string& domain);
nlohmann::json app(const std::string& package, const std::string& signing_key,
                   const std::vector<std::string>& entitled_domains,
                   const std::string& developer_website = "");
nlohmann::json dal_association(
    const std::vector<std::pair<std::string, std::string>>& package_and_key,
    const std::string& security = "https-valid");
nlohmann::json apple_association(
    const std::vector<std::pair<std::string, std::string>>& team_and_package,
    const std::string& security = "https-valid");
nlohmann::json html_document(const std::string& html, const std::string& security = "https-valid");
nlohmann::json manual_mapping(const std::string& package, const std::string& domain);

// Minimal login form markup.
std::string login_form_html(const std::string& action_url, const std::string& method = "post");
// The canonical page: posts to https://<domain>/login.
std::string login_page_html(const std::string& domain);

// Scene with the walmart and shop credentials, both legitimate apps (DAL
// files hosted on their domains), login pages over https, and an
// always-approve user. Builders tweak the JSON from here.
nlohmann::json base_scene_json();

Scene load(const nlohmann::json& scene_json);

// Host-app scrape-and-bridge script pair (the classic webview grab).
std::vector<ScriptEvent> bridge_scripts(std::size_t form_index = 0,
                                        const std::string& channel = "callbackHandler");

}  // namespace autofill_sim::scenekit
