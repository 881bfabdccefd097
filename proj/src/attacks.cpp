#include "autofill_sim/attacks.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "autofill_sim/errors.hpp"
#include "autofill_sim/scenekit.hpp"

namespace autofill_sim {

namespace {

namespace sk = scenekit;
using nlohmann::json;

const std::pair<AttackKind, const char*> kAttackNames[] = {
    {AttackKind::CrossOriginIframePhish, "cross-origin-iframe-phish"},
    {AttackKind::WebViewMaliciousPage, "webview-malicious-page"},
    {AttackKind::WebViewMaliciousApp, "webview-malicious-app"},
    {AttackKind::NetworkInjectionHttp, "network-injection-http"},
    {AttackKind::NetworkInjectionBadCert, "network-injection-bad-cert"},
    {AttackKind::ActionRewriteStatic, "action-rewrite-static"},
    {AttackKind::ActionRewriteDynamic, "action-rewrite-dynamic"},
    {AttackKind::GetMethodLeak, "get-method-leak"},
    {AttackKind::LookAlikeApp, "look-alike-app"},
    {AttackKind::SideLoadedImpersonation, "side-loaded-impersonation"},
    {AttackKind::PackageNameSquatPrefix, "package-name-squat-prefix"},
    {AttackKind::PackageNameSquatSubstring, "package-name-squat-substring"},
    {AttackKind::PackageNameSquatPackageInversion, "package-name-squat-package-inversion"},
};

std::string attacker_url(const std::string& path) {
    return std::string("https://") + sk::kAttackerDomain + path;
}

// Page-injected scrape + exfiltrate pair appended to a login page.
std::string exfil_scripts_html(std::size_t form_index = 0) {
    return "<script-event phase=\"postfill\" action=\"scrape-fields\" form=\"" +
           std::to_string(form_index) + "\">\n" +
           "<script-event phase=\"postfill\" action=\"exfiltrate-to\" to=\"" +
           attacker_url("/collect") + "\">\n";
}

std::string rewrite_script_html(const std::string& to_url, std::size_t form_index = 0) {
    return "<script-event phase=\"prefill\" action=\"rewrite-action\" to=\"" + to_url +
           "\" form=\"" + std::to_string(form_index) + "\">\n";
}

Document scene_document(const Scene& scene, const std::string& domain, const std::string& path) {
    const DocumentSource* src = scene.find_document(DomainName::parse(domain), path);
    if (!src) throw ReferenceError("scenario document " + domain + path + " is missing");
    return src->parsed;
}

const AppIdentity& scene_app(const Scene& scene, const std::string& package) {
    const AppIdentity* app = scene.find_app(package);
    if (!app) throw ReferenceError("scenario app " + package + " is missing");
    return *app;
}

// Replaces the victim's login page markup in a base-scene json.
void set_victim_login(json& scene, const std::string& html, const std::string& security) {
    scene["domains"][sk::kVictimDomain]["documents"][sk::kLoginPath] =
        sk::html_document(html, security);
}

AttackScenario finish(json scene_json, AttackKind kind, const DomainName& victim) {
    AttackScenario sc;
    sc.scene = sk::load(scene_json);
    sc.victim = victim;
    sc.attacker_origin = Origin{DomainName::parse(sk::kAttackerDomain),
                                ConnectionSecurity::https()};
    switch (kind) {
        case AttackKind::CrossOriginIframePhish:
            sc.ctx = make_browser_context(
                scene_document(sc.scene, sk::kAttackerDomain, "/index.html"));
            break;
        case AttackKind::WebViewMaliciousPage:
            sc.ctx = make_webview_context(scene_app(sc.scene, sk::kVictimApp),
                                          scene_document(sc.scene, sk::kAttackerDomain,
                                                         "/phish.html"));
            break;
        case AttackKind::WebViewMaliciousApp:
            sc.attacker_package = sk::kAttackerApp;
            sc.ctx = make_webview_context(scene_app(sc.scene, sk::kAttackerApp),
                                          scene_document(sc.scene, sk::kVictimDomain,
                                                         sk::kLoginPath),
                                          sk::bridge_scripts());
            break;
        case AttackKind::NetworkInjectionHttp:
        case AttackKind::NetworkInjectionBadCert:
        case AttackKind::ActionRewriteStatic:
        case AttackKind::ActionRewriteDynamic:
        case AttackKind::GetMethodLeak:
            sc.ctx = make_browser_context(
                scene_document(sc.scene, sk::kVictimDomain, sk::kLoginPath));
            break;
        case AttackKind::LookAlikeApp:
        case AttackKind::SideLoadedImpersonation:
            sc.attacker_package = sk::kVictimApp;  // the impostor reuses the id
            sc.ctx = make_native_context(scene_app(sc.scene, sk::kVictimApp), victim);
            break;
        case AttackKind::PackageNameSquatPrefix:
        case AttackKind::PackageNameSquatSubstring:
        case AttackKind::PackageNameSquatPackageInversion: {
            MappingScheme::Kind scheme =
                kind == AttackKind::PackageNameSquatPrefix ? MappingScheme::Kind::Prefix
                : kind == AttackKind::PackageNameSquatSubstring
                    ? MappingScheme::Kind::Substring
                    : MappingScheme::Kind::PackageInversion;
            AppIdentity squat = squat_generator(scheme, victim);
            sc.attacker_package = squat.package_id;
            sc.ctx = make_native_context(scene_app(sc.scene, squat.package_id), victim);
            break;
        }
    }
    return sc;
}

struct SecretHit {
    Credential cred;
    std::string captured_by;
};

void scan_values(const std::map<std::string, std::string>& values,
                 const std::map<std::string, Credential>& secrets,
                 const std::function<bool(const Credential&)>& mapped,
                 const std::string& captured_by, std::vector<SecretHit>& hits) {
    for (const auto& [field, value] : values) {
        (void)field;
        auto it = secrets.find(value);
        if (it == secrets.end()) continue;
        if (!mapped(it->second)) hits.push_back(SecretHit{it->second, captured_by});
    }
}

AttackOutcome classify(const AttackScenario& sc, const CeremonyResult& r,
                       const std::vector<Exfiltration>& observed, UserAgent user) {
    const SuffixList suffixes = sc.scene.suffixes();
    std::map<std::string, Credential> secrets;
    for (const Credential& c : sc.scene.vault.credentials) secrets[c.password.reveal()] = c;

    auto app_mapped = [&](const Credential& c) {
        return verify_bidirectional_in_scene(sc.ctx.app, c.mapped_domain, sc.scene).decision ==
               MappingVerdict::Decision::Verified;
    };

    std::vector<SecretHit> hits;
    for (const Exfiltration& ex : observed) {
        if (ex.sink == Exfiltration::Sink::Network) {
            auto mapped = [&](const Credential& c) {
                return ex.destination.domain.same_registrable(c.mapped_domain, suffixes);
            };
            scan_values(ex.values, secrets, mapped, ex.destination.str(), hits);
        } else {
            scan_values(ex.values, secrets, app_mapped, sc.ctx.app.package_id, hits);
        }
    }
    if (r.request) {
        auto mapped = [&](const Credential& c) {
            return r.request->destination.domain.same_registrable(c.mapped_domain, suffixes);
        };
        scan_values(r.request->body_params, secrets, mapped, r.request->destination.str(), hits);
        scan_values(r.request->url_params, secrets, mapped, r.request->destination.str(), hits);
    }
    // A native fill hands the values straight to the requesting app.
    if (sc.ctx.kind == FillContext::Kind::NativeUi && r.filled.filled &&
        r.filled.mode == FillDecision::FillMode::IntoDocument) {
        std::map<std::string, std::string> values;
        for (const auto& [key, value] : r.filled.fill.values) values[key.second] = value;
        scan_values(values, secrets, app_mapped, sc.ctx.app.package_id, hits);
    }

    AttackOutcome out;
    if (!hits.empty()) {
        out.result = r.decision.gate == FillDecision::Gate::NoGate
                         ? AttackOutcome::Result::Stolen
                         : AttackOutcome::Result::UserGatedStolen;
        out.captured_by = hits.front().captured_by;
        for (const SecretHit& h : hits) out.credential_ids.push_back(h.cred.id);
        std::sort(out.credential_ids.begin(), out.credential_ids.end());
        out.credential_ids.erase(
            std::unique(out.credential_ids.begin(), out.credential_ids.end()),
            out.credential_ids.end());
        return out;
    }
    if (r.decision.offered.empty()) {
        out.result = AttackOutcome::Result::Blocked;
        if (r.decision.refused_by)
            out.blocked_reason = to_string(*r.decision.refused_by);
        else
            out.blocked_reason = r.decision.note.empty() ? "no-mapping" : r.decision.note;
        return out;
    }
    if (user == UserAgent::AlwaysDeny) {
        out.result = AttackOutcome::Result::UserGatedSafe;
        out.blocked_reason = "user-denied";
        return out;
    }
    out.result = AttackOutcome::Result::Blocked;
    if (r.refusal)
        out.blocked_reason = to_string(CheckId::ActionDynamic);
    else if (r.filled.mode == FillDecision::FillMode::OnTransmission)
        out.blocked_reason = to_string(CheckId::FillOnTransmission);
    else
        out.blocked_reason = "no-secret-escape";
    return out;
}

}  // namespace

std::string to_string(AttackKind kind) {
    for (const auto& [k, name] : kAttackNames)
        if (k == kind) return name;
    throw InvariantError("unknown attack kind");
}

std::optional<AttackKind> parse_attack_kind(std::string_view text) {
    for (const auto& [k, name] : kAttackNames)
        if (text == name) return k;
    return std::nullopt;
}

const std::vector<AttackKind>& all_attacks() {
    static const std::vector<AttackKind> kinds = [] {
        std::vector<AttackKind> out;
        for (const auto& [k, name] : kAttackNames) {
            (void)name;
            out.push_back(k);
        }
        return out;
    }();
    return kinds;
}

std::string to_string(AttackOutcome::Result r) {
    switch (r) {
        case AttackOutcome::Result::Stolen:
            return "stolen";
        case AttackOutcome::Result::UserGatedStolen:
            return "user-gated-stolen";
        case AttackOutcome::Result::UserGatedSafe:
            return "user-gated-safe";
        case AttackOutcome::Result::Blocked:
            return "blocked";
    }
    throw InvariantError("unknown attack result");
}

AppIdentity squat_generator(MappingScheme::Kind scheme, const DomainName& victim) {
    const DomainName reg = victim.registrable();
    const auto& labels = reg.labels();  // most-specific label first
    if (labels.size() < 2) throw InvariantError("victim domain has no registrable part");

    std::string package;
    switch (scheme) {
        case MappingScheme::Kind::Prefix:
        case MappingScheme::Kind::PackageInversion: {
            // The reversed registrable domain plus an attacker suffix.
            for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
                if (!package.empty()) package += '.';
                package += *it;
            }
            package += ".evil";
            break;
        }
        case MappingScheme::Kind::Substring: {
            if (labels.front().size() < 3)
                throw InvariantError("victim label too short for a substring squat");
            package = "com." + labels.front().substr(0, 3) + ".evil";
            break;
        }
        default:
            throw UnsquattableSchemeError("scheme " + to_string(scheme) +
                                          " cannot be squatted by package name");
    }

    AppIdentity app;
    app.package_id = package;
    app.signing_fingerprint = fingerprint(sk::kAttackerKey);
    validate_app_identity(app);
    return app;
}

AttackScenario build_scenario(AttackKind kind, const DomainName& victim) {
    if (victim != DomainName::parse(sk::kVictimDomain) &&
        kind != AttackKind::PackageNameSquatPrefix &&
        kind != AttackKind::PackageNameSquatSubstring &&
        kind != AttackKind::PackageNameSquatPackageInversion)
        throw InvariantError("scenario builders model the canonical victim walmart.com");

    json scene = sk::base_scene_json();
    const std::string victim_str = victim.str();

    switch (kind) {
        case AttackKind::CrossOriginIframePhish:
            // The attacker's page embeds the victim login; the framed content
            // is attacker-influenced and exfiltrates whatever gets filled.
            set_victim_login(scene,
                             sk::login_page_html(victim_str) + exfil_scripts_html(),
                             "https-valid");
            scene["domains"][sk::kAttackerDomain] = json{
                {"documents",
                 json{{"/index.html",
                       sk::html_document("<iframe src=\"https://" + victim_str +
                                         "/login.html\">\n")}}}};
            break;
        case AttackKind::WebViewMaliciousPage:
            // A benign app's webview navigates to an attacker page that
            // mimics a login and sends everything to the attacker.
            scene["vault"]["manual_app_mappings"] =
                json::array({sk::manual_mapping(sk::kVictimApp, victim_str)});
            scene["domains"][sk::kAttackerDomain] = json{
                {"documents",
                 json{{"/phish.html",
                       sk::html_document(sk::login_form_html(attacker_url("/steal")) +
                                         exfil_scripts_html())}}}};
            break;
        case AttackKind::WebViewMaliciousApp:
            // An attacker app hosts the genuine victim login in its webview
            // and scrapes the DOM through the bridge; the page is untouched.
            scene["apps"].push_back(sk::app(sk::kAttackerApp, sk::kAttackerKey, {}));
            break;
        case AttackKind::NetworkInjectionHttp:
            set_victim_login(scene,
                             sk::login_form_html("http://" + victim_str + "/login") +
                                 exfil_scripts_html(),
                             "http");
            break;
        case AttackKind::NetworkInjectionBadCert:
            set_victim_login(scene,
                             sk::login_page_html(victim_str) + exfil_scripts_html(),
                             "https-invalid-cert");
            break;
        case AttackKind::ActionRewriteStatic:
            set_victim_login(scene, sk::login_form_html(attacker_url("/steal")), "https-valid");
            break;
        case AttackKind::ActionRewriteDynamic:
            set_victim_login(scene,
                             sk::login_page_html(victim_str) +
                                 rewrite_script_html(attacker_url("/steal")),
                             "https-valid");
            break;
        case AttackKind::GetMethodLeak:
            set_victim_login(scene,
                             sk::login_form_html("https://" + victim_str + "/search", "get"),
                             "https-valid");
            break;
        case AttackKind::LookAlikeApp:
        case AttackKind::SideLoadedImpersonation: {
            // Same package id as the real app, the attacker's signing key.
            json apps = json::array();
            for (const json& aj : scene["apps"])
                if (aj["package"] != sk::kVictimApp) apps.push_back(aj);
            apps.push_back(sk::app(sk::kVictimApp, sk::kAttackerKey, {victim_str}, victim_str));
            scene["apps"] = apps;
            if (kind == AttackKind::SideLoadedImpersonation)
                // The user had mapped the genuine app by hand; the side-loaded
                // impostor inherits that mapping.
                scene["vault"]["manual_app_mappings"] =
                    json::array({sk::manual_mapping(sk::kVictimApp, victim_str)});
            break;
        }
        case AttackKind::PackageNameSquatPrefix:
        case AttackKind::PackageNameSquatSubstring:
        case AttackKind::PackageNameSquatPackageInversion: {
            MappingScheme::Kind scheme =
                kind == AttackKind::PackageNameSquatPrefix ? MappingScheme::Kind::Prefix
                : kind == AttackKind::PackageNameSquatSubstring
                    ? MappingScheme::Kind::Substring
                    : MappingScheme::Kind::PackageInversion;
            AppIdentity squat = squat_generator(scheme, victim);
            scene["apps"].push_back(sk::app(squat.package_id, sk::kAttackerKey, {}));
            break;
        }
    }

    return finish(std::move(scene), kind, victim);
}

AttackRun run_attack_detailed(AttackKind kind, PolicyId policy,
                              const std::optional<ManagerProfile>& manager, UserAgent user) {
    AttackRun run;
    run.scenario = build_scenario(kind, DomainName::parse(sk::kVictimDomain));

    CeremonyOptions opts;
    opts.user_override = user;
    opts.seed = "attack:" + to_string(kind);
    run.ceremony = run_ceremony(policy, manager, run.scenario.ctx, run.scenario.scene, opts);

    run.observed = run.ceremony.exfiltrations;
    if (kind == AttackKind::GetMethodLeak && run.ceremony.request &&
        run.ceremony.request->method == Method::Get) {
        // Credentials in a query string leak onward through referrer headers.
        Exfiltration leak;
        leak.sink = Exfiltration::Sink::Network;
        leak.destination = run.scenario.attacker_origin;
        leak.values = run.ceremony.request->url_params;
        run.observed.push_back(std::move(leak));
    }

    run.outcome = classify(run.scenario, run.ceremony, run.observed, user);
    return run;
}

AttackOutcome run_attack(AttackKind kind, PolicyId policy,
                         const std::optional<ManagerProfile>& manager, UserAgent user) {
    return run_attack_detailed(kind, policy, manager, user).outcome;
}

}  // namespace autofill_sim
