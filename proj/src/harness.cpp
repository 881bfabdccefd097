#include "autofill_sim/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "autofill_sim/errors.hpp"
#include "autofill_sim/scene.hpp"
#include "autofill_sim/scenekit.hpp"

namespace autofill_sim {

namespace {

namespace sk = scenekit;
using nlohmann::json;

const AppIdentity& scene_app(const Scene& scene, const std::string& package) {
    const AppIdentity* app = scene.find_app(package);
    if (!app) throw ReferenceError("fixture scene is missing app " + package);
    return *app;
}

Document scene_document(const Scene& scene, const std::string& domain, const std::string& path) {
    const DocumentSource* src = scene.find_document(DomainName::parse(domain), path);
    if (!src) throw ReferenceError("fixture scene is missing document " + domain + path);
    return src->parsed;
}

// The squatting package used by the native app-to-domain fixture.
const char* kSquatApp = "com.walmart.evil";

FillContext build_context(Suite suite, CheckId check, const Scene& scene) {
    switch (suite) {
        case Suite::Browser: {
            if (check == CheckId::CrossOriginIframe)
                return make_browser_context(
                    scene_document(scene, sk::kAttackerDomain, "/index.html"));
            return make_browser_context(
                scene_document(scene, sk::kVictimDomain, sk::kLoginPath));
        }
        case Suite::Native: {
            const char* package = check == CheckId::AppToDomain ? kSquatApp : sk::kVictimApp;
            return make_native_context(scene_app(scene, package),
                                       DomainName::parse(sk::kVictimDomain));
        }
        case Suite::WebView: {
            Document page = check == CheckId::CrossOriginIframe
                                ? scene_document(scene, sk::kHostDomain, "/portal.html")
                                : scene_document(scene, sk::kVictimDomain, sk::kLoginPath);
            std::vector<ScriptEvent> scripts;
            if (check == CheckId::WebViewHostAccess) scripts = sk::bridge_scripts();
            return make_webview_context(scene_app(scene, sk::kHostApp), std::move(page),
                                        std::move(scripts));
        }
    }
    throw InvariantError("unknown suite");
}

bool is_vault_secret(const Scene& scene, const std::string& value) {
    for (const Credential& c : scene.vault.credentials)
        if (c.password.reveal() == value) return true;
    return false;
}

Verdict classify_check(Suite suite, CheckId check, const Scene& scene, const FillContext& ctx,
                       const CeremonyResult& r) {
    const FillDecision& d = r.decision;
    const bool offered = !d.offered.empty();
    const SuffixList suffixes = scene.suffixes();

    switch (check) {
        case CheckId::InteractionRequired:
            // The fixture runs with an always-deny user: the gate must exist
            // and denial must keep everything in the vault.
            return d.gate == FillDecision::Gate::UserGateRequired && !r.filled.filled
                       ? Verdict::Secure
                       : Verdict::Insecure;
        case CheckId::DomainMapping: {
            if (!offered) return Verdict::Secure;
            const Origin page = document_at(ctx.doc, d.detection->ref.frame_path).origin;
            bool all_page = std::all_of(d.offered.begin(), d.offered.end(),
                                        [&](const Credential& c) {
                                            return c.mapped_domain.same_registrable(page.domain,
                                                                                    suffixes);
                                        });
            return all_page ? Verdict::Secure : Verdict::Insecure;
        }
        case CheckId::HttpsDowngrade:
        case CheckId::BadCert:
        case CheckId::ActionStatic:
        case CheckId::MethodGet:
        case CheckId::CrossOriginIframe:
            // The fixture presents the anomaly; offering means filling it.
            return offered ? Verdict::Insecure : Verdict::Secure;
        case CheckId::FillOnTransmission:
            if (!offered) return Verdict::Secure;
            return d.fill_mode == FillDecision::FillMode::OnTransmission ? Verdict::Secure
                                                                         : Verdict::Insecure;
        case CheckId::ActionDynamic: {
            if (!offered) return Verdict::Secure;
            if (r.refusal) return Verdict::Secure;
            if (r.request) {
                for (const auto& params : {r.request->body_params, r.request->url_params}) {
                    for (const auto& [field, value] : params) {
                        (void)field;
                        if (is_vault_secret(scene, value) &&
                            !r.request->destination.domain.same_registrable(
                                DomainName::parse(sk::kVictimDomain), suffixes))
                            return Verdict::Insecure;
                    }
                }
            }
            return Verdict::Secure;
        }
        case CheckId::AppToDomain:
        case CheckId::DomainToApp:
            if (!offered) return Verdict::Secure;
            return d.warning ? Verdict::Partial : Verdict::Insecure;
        case CheckId::OtherAppAccess:
            // OS app segmentation: other apps never see the filled values.
            return Verdict::Secure;
        case CheckId::WebViewHostAccess: {
            if (suite == Suite::Native)
                // Web content cannot reach into the app's native fields.
                return Verdict::Secure;
            for (const Exfiltration& ex : r.exfiltrations) {
                for (const auto& [field, value] : ex.values) {
                    (void)field;
                    if (is_vault_secret(scene, value)) return Verdict::Insecure;
                }
            }
            return Verdict::Secure;
        }
    }
    throw InvariantError("unknown check id");
}

Verdict run_check(Suite suite, CheckId check, PolicyId policy,
                  const std::optional<ManagerProfile>& manager, const std::string& scene_dir) {
    const std::string path =
        scene_dir + "/" + to_string(suite) + "/" + to_string(check) + ".scene.json";
    Scene scene = load_scene_file(path);
    FillContext ctx = build_context(suite, check, scene);
    CeremonyOptions opts;
    opts.seed = "conformance:" + to_string(suite) + ":" + to_string(check);
    CeremonyResult r = run_ceremony(policy, manager, ctx, scene, opts);
    return classify_check(suite, check, scene, ctx, r);
}

// --- fixture scene builders ---

json browser_fixture(CheckId check) {
    json scene = sk::base_scene_json();
    auto set_login = [&](const std::string& html, const std::string& security) {
        scene["domains"][sk::kVictimDomain]["documents"][sk::kLoginPath] =
            sk::html_document(html, security);
    };
    const std::string victim = sk::kVictimDomain;
    switch (check) {
        case CheckId::InteractionRequired:
            scene["user_agent"] = "always-deny";
            break;
        case CheckId::DomainMapping:
            // An unrelated credential shows the offer stays page-scoped.
            scene["vault"]["credentials"].push_back(
                sk::credential(sk::kOtherCred, "someone", "example-secret-3", sk::kOtherDomain));
            break;
        case CheckId::HttpsDowngrade:
            set_login(sk::login_form_html("http://" + victim + "/login"), "http");
            break;
        case CheckId::BadCert:
            set_login(sk::login_page_html(victim), "https-invalid-cert");
            break;
        case CheckId::FillOnTransmission:
            break;
        case CheckId::ActionStatic:
            set_login(sk::login_form_html(std::string("https://") + sk::kAttackerDomain +
                                          "/steal"),
                      "https-valid");
            break;
        case CheckId::ActionDynamic:
            set_login(sk::login_page_html(victim) +
                          "<script-event phase=\"prefill\" action=\"rewrite-action\" to=\"https://" +
                          std::string(sk::kAttackerDomain) + "/steal\" form=\"0\">\n",
                      "https-valid");
            break;
        case CheckId::MethodGet:
            set_login(sk::login_form_html("https://" + victim + "/search", "get"), "https-valid");
            break;
        case CheckId::CrossOriginIframe:
            scene["domains"][sk::kAttackerDomain] = json{
                {"documents",
                 json{{"/index.html", sk::html_document("<iframe src=\"https://" + victim +
                                                        "/login.html\">\n")}}}};
            break;
        default:
            throw InvariantError("check " + to_string(check) + " is not a browser fixture");
    }
    return scene;
}

json native_fixture(CheckId check) {
    json scene = sk::base_scene_json();
    const std::string victim = sk::kVictimDomain;
    switch (check) {
        case CheckId::InteractionRequired:
            scene["vault"]["manual_app_mappings"] =
                json::array({sk::manual_mapping(sk::kVictimApp, victim)});
            scene["user_agent"] = "always-deny";
            break;
        case CheckId::AppToDomain:
            // An attacker app claims the victim's domain without appearing in
            // the domain's association file.
            scene["apps"].push_back(sk::app(kSquatApp, sk::kAttackerKey, {victim}, victim));
            break;
        case CheckId::DomainToApp: {
            // A side-loaded impostor: the genuine package id signed with the
            // attacker's key, still manually mapped by the user.
            json apps = json::array();
            for (const json& aj : scene["apps"])
                if (aj["package"] != sk::kVictimApp) apps.push_back(aj);
            apps.push_back(sk::app(sk::kVictimApp, sk::kAttackerKey, {victim}, victim));
            scene["apps"] = apps;
            scene["vault"]["manual_app_mappings"] =
                json::array({sk::manual_mapping(sk::kVictimApp, victim)});
            break;
        }
        case CheckId::OtherAppAccess:
        case CheckId::WebViewHostAccess:
            scene["vault"]["manual_app_mappings"] =
                json::array({sk::manual_mapping(sk::kVictimApp, victim)});
            break;
        default:
            throw InvariantError("check " + to_string(check) + " is not a native fixture");
    }
    return scene;
}

json webview_fixture(CheckId check) {
    json scene = sk::base_scene_json();
    // Manual-mapping managers need the host app wired up to its domain.
    scene["vault"]["manual_app_mappings"] =
        json::array({sk::manual_mapping(sk::kHostApp, sk::kHostDomain)});
    auto set_login = [&](const std::string& html, const std::string& security) {
        scene["domains"][sk::kVictimDomain]["documents"][sk::kLoginPath] =
            sk::html_document(html, security);
    };
    const std::string victim = sk::kVictimDomain;
    switch (check) {
        case CheckId::InteractionRequired:
            scene["user_agent"] = "always-deny";
            break;
        case CheckId::DomainMapping:
        case CheckId::WebViewHostAccess:
        case CheckId::FillOnTransmission:
            break;
        case CheckId::HttpsDowngrade:
            set_login(sk::login_form_html("http://" + victim + "/login"), "http");
            break;
        case CheckId::BadCert:
            set_login(sk::login_page_html(victim), "https-invalid-cert");
            break;
        case CheckId::ActionStatic:
            set_login(sk::login_form_html(std::string("https://") + sk::kAttackerDomain +
                                          "/steal"),
                      "https-valid");
            break;
        case CheckId::ActionDynamic:
            set_login(sk::login_page_html(victim) +
                          "<script-event phase=\"prefill\" action=\"rewrite-action\" to=\"https://" +
                          std::string(sk::kAttackerDomain) + "/steal\" form=\"0\">\n",
                      "https-valid");
            break;
        case CheckId::MethodGet:
            set_login(sk::login_form_html("https://" + victim + "/search", "get"), "https-valid");
            break;
        case CheckId::CrossOriginIframe:
            scene["domains"][sk::kHostDomain]["documents"]["/portal.html"] =
                sk::html_document("<iframe src=\"https://" + victim + "/login.html\">\n");
            break;
        default:
            throw InvariantError("check " + to_string(check) + " is not a webview fixture");
    }
    return scene;
}

json fixture_scene_json(Suite suite, CheckId check) {
    switch (suite) {
        case Suite::Browser:
            return browser_fixture(check);
        case Suite::Native:
            return native_fixture(check);
        case Suite::WebView:
            return webview_fixture(check);
    }
    throw InvariantError("unknown suite");
}

std::string policy_label(const ConformanceReport& report) {
    std::string label = to_string(report.policy);
    if (report.manager_id) label += "/" + *report.manager_id;
    return label;
}

json report_to_json(const ConformanceReport& report) {
    json j;
    j["suite"] = to_string(report.suite);
    j["framework"] = to_string(report.policy);
    if (report.manager_id) j["manager"] = *report.manager_id;
    json cells = json::array();
    for (const ConformanceCell& cell : report.cells)
        cells.push_back(json{{"check", to_string(cell.check)},
                             {"verdict", to_string(cell.verdict)}});
    j["cells"] = std::move(cells);
    return j;
}

std::string markdown_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const std::string& c : cells) out += " " + c + " |";
    return out + "\n";
}

std::string markdown_table(const std::vector<CheckId>& columns,
                           const std::vector<ConformanceReport>& rows) {
    std::vector<std::string> header{"model"};
    for (CheckId c : columns) header.push_back(to_string(c));
    std::string out = markdown_row(header);
    std::vector<std::string> rule(header.size(), "---");
    out += markdown_row(rule);
    for (const ConformanceReport& report : rows) {
        std::vector<std::string> cells{policy_label(report)};
        for (const ConformanceCell& cell : report.cells)
            cells.push_back(verdict_glyph(cell.verdict));
        out += markdown_row(cells);
    }
    return out;
}

json attack_row_json(const AttackMatrixRow& row) {
    json j;
    j["attack"] = to_string(row.attack);
    j["framework"] = to_string(row.policy);
    j["result"] = to_string(row.outcome.result);
    if (!row.outcome.credential_ids.empty()) j["credentials"] = row.outcome.credential_ids;
    if (!row.outcome.captured_by.empty()) j["captured_by"] = row.outcome.captured_by;
    if (!row.outcome.blocked_reason.empty()) j["blocked_reason"] = row.outcome.blocked_reason;
    return j;
}

std::string attack_cell(const AttackOutcome& outcome) {
    switch (outcome.result) {
        case AttackOutcome::Result::Stolen:
        case AttackOutcome::Result::UserGatedStolen:
            return to_string(outcome.result) + " → " + outcome.captured_by;
        case AttackOutcome::Result::UserGatedSafe:
            return to_string(outcome.result);
        case AttackOutcome::Result::Blocked:
            return to_string(outcome.result) + " (" + outcome.blocked_reason + ")";
    }
    throw InvariantError("unknown attack result");
}

}  // namespace

std::string to_string(Suite s) {
    switch (s) {
        case Suite::Browser:
            return "browser";
        case Suite::Native:
            return "native";
        case Suite::WebView:
            return "webview";
    }
    throw InvariantError("unknown suite");
}

std::optional<Suite> parse_suite(std::string_view text) {
    if (text == "browser") return Suite::Browser;
    if (text == "native") return Suite::Native;
    if (text == "webview") return Suite::WebView;
    return std::nullopt;
}

const std::vector<Suite>& all_suites() {
    static const std::vector<Suite> suites = {Suite::Browser, Suite::Native, Suite::WebView};
    return suites;
}

const std::vector<CheckId>& suite_checks(Suite s) {
    static const std::vector<CheckId> browser = {
        CheckId::InteractionRequired, CheckId::DomainMapping,  CheckId::HttpsDowngrade,
        CheckId::BadCert,             CheckId::FillOnTransmission, CheckId::ActionStatic,
        CheckId::ActionDynamic,       CheckId::MethodGet,      CheckId::CrossOriginIframe,
    };
    static const std::vector<CheckId> native = {
        CheckId::InteractionRequired, CheckId::AppToDomain, CheckId::DomainToApp,
        CheckId::OtherAppAccess,      CheckId::WebViewHostAccess,
    };
    static const std::vector<CheckId> webview = {
        CheckId::InteractionRequired, CheckId::DomainMapping,      CheckId::HttpsDowngrade,
        CheckId::BadCert,             CheckId::WebViewHostAccess,  CheckId::FillOnTransmission,
        CheckId::ActionStatic,        CheckId::ActionDynamic,      CheckId::MethodGet,
        CheckId::CrossOriginIframe,
    };
    switch (s) {
        case Suite::Browser:
            return browser;
        case Suite::Native:
            return native;
        case Suite::WebView:
            return webview;
    }
    throw InvariantError("unknown suite");
}

bool check_delegated(Suite s, CheckId check, PolicyId policy) {
    if (policy == PolicyId::AndroidAutofillService) {
        if (s == Suite::Browser) return check == CheckId::CrossOriginIframe;
        if (s == Suite::Native)
            return check == CheckId::AppToDomain || check == CheckId::DomainToApp;
        return check == CheckId::DomainMapping || check == CheckId::CrossOriginIframe;
    }
    if (policy == PolicyId::IosExtensions)
        return s == Suite::WebView && check == CheckId::DomainMapping;
    return false;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "markdown") return ReportFormat::Markdown;
    return std::nullopt;
}

std::string default_scene_dir() {
    if (const char* env = std::getenv("AUTOFILL_SIM_FIXTURES")) return env;
    return "fixtures";
}

ConformanceReport run_suite(Suite suite, PolicyId policy,
                            const std::optional<ManagerProfile>& manager,
                            const std::string& scene_dir) {
    ConformanceReport report;
    report.suite = suite;
    report.policy = policy;
    if (manager) report.manager_id = manager->id;
    for (CheckId check : suite_checks(suite)) {
        Verdict verdict;
        if (!manager && check_delegated(suite, check, policy))
            verdict = Verdict::Delegated;
        else
            verdict = run_check(suite, check, policy, manager, scene_dir);
        report.cells.push_back(ConformanceCell{check, verdict});
    }
    return report;
}

std::vector<GoldenDiff> compare_golden(const ConformanceReport& report,
                                       const std::string& golden_path) {
    std::ifstream in(golden_path, std::ios::binary);
    if (!in) throw GoldenParseError("cannot open golden file " + golden_path);
    std::ostringstream buf;
    buf << in.rdbuf();

    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw GoldenParseError(std::string("golden is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("suite") || !j.contains("framework") ||
        !j.contains("cells") || !j.at("cells").is_array())
        throw GoldenParseError("golden needs suite, framework, and cells");
    auto suite = parse_suite(j.at("suite").get<std::string>());
    if (!suite) throw GoldenParseError("golden names unknown suite");
    auto policy = parse_policy_id(j.at("framework").get<std::string>());
    if (!policy) throw GoldenParseError("golden names unknown framework");
    if (*suite != report.suite || *policy != report.policy)
        throw GoldenParseError("golden is for " + j.at("suite").get<std::string>() + "/" +
                               j.at("framework").get<std::string>() + ", not this report");

    std::vector<GoldenDiff> diffs;
    for (const json& cj : j.at("cells")) {
        if (!cj.is_object() || !cj.contains("check") || !cj.contains("verdict"))
            throw GoldenParseError("golden cell needs check and verdict");
        auto check = parse_check_id(cj.at("check").get<std::string>());
        if (!check)
            throw GoldenParseError("golden names unknown check \"" +
                                   cj.at("check").get<std::string>() + "\"");
        auto expected = parse_verdict(cj.at("verdict").get<std::string>());
        if (!expected)
            throw GoldenParseError("golden names unknown verdict \"" +
                                   cj.at("verdict").get<std::string>() + "\"");
        auto it = std::find_if(report.cells.begin(), report.cells.end(),
                               [&](const ConformanceCell& c) { return c.check == *check; });
        if (it == report.cells.end())
            throw GoldenParseError("golden check " + to_string(*check) +
                                   " is not part of this suite");
        if (it->verdict != *expected)
            diffs.push_back(GoldenDiff{*check, *expected, it->verdict});
    }
    return diffs;
}

std::string render_report(const ConformanceReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";
    return markdown_table(suite_checks(report.suite), {report});
}

ConformanceReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GoldenParseError(std::string("report is not valid JSON: ") + e.what());
    }
    ConformanceReport report;
    auto suite = parse_suite(j.at("suite").get<std::string>());
    auto policy = parse_policy_id(j.at("framework").get<std::string>());
    if (!suite || !policy) throw GoldenParseError("report names unknown suite or framework");
    report.suite = *suite;
    report.policy = *policy;
    if (j.contains("manager")) report.manager_id = j.at("manager").get<std::string>();
    for (const json& cj : j.at("cells")) {
        auto check = parse_check_id(cj.at("check").get<std::string>());
        auto verdict = parse_verdict(cj.at("verdict").get<std::string>());
        if (!check || !verdict) throw GoldenParseError("report cell is malformed");
        report.cells.push_back(ConformanceCell{*check, *verdict});
    }
    return report;
}

std::vector<ConformanceReport> run_matrix(const std::string& scene_dir) {
    std::vector<ConformanceReport> reports;
    for (Suite suite : all_suites())
        for (PolicyId policy : all_policies())
            reports.push_back(run_suite(suite, policy, std::nullopt, scene_dir));
    return reports;
}

std::string render_matrix(const std::vector<ConformanceReport>& reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json j = json::array();
        for (const ConformanceReport& report : reports) j.push_back(report_to_json(report));
        return j.dump(2) + "\n";
    }
    std::string out;
    for (Suite suite : all_suites()) {
        std::vector<ConformanceReport> rows;
        for (const ConformanceReport& report : reports)
            if (report.suite == suite) rows.push_back(report);
        if (rows.empty()) continue;
        out += "## " + to_string(suite) + "\n\n";
        out += markdown_table(suite_checks(suite), rows);
        out += "\n";
    }
    return out;
}

std::vector<AttackMatrixRow> run_attack_matrix() {
    std::vector<AttackMatrixRow> rows;
    for (AttackKind kind : all_attacks())
        for (PolicyId policy : all_policies())
            rows.push_back(AttackMatrixRow{
                kind, policy,
                run_attack(kind, policy, std::nullopt, UserAgent::AlwaysApprove)});
    return rows;
}

std::string render_attack_matrix(const std::vector<AttackMatrixRow>& rows, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json j = json::array();
        for (const AttackMatrixRow& row : rows) j.push_back(attack_row_json(row));
        return j.dump(2) + "\n";
    }
    std::string out = "## attacks\n\n";
    std::vector<std::string> header{"attack"};
    for (PolicyId policy : all_policies()) header.push_back(to_string(policy));
    out += markdown_row(header);
    out += markdown_row(std::vector<std::string>(header.size(), "---"));
    for (AttackKind kind : all_attacks()) {
        std::vector<std::string> cells{to_string(kind)};
        for (PolicyId policy : all_policies()) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const AttackMatrixRow& row) {
                return row.attack == kind && row.policy == policy;
            });
            cells.push_back(it == rows.end() ? "-" : attack_cell(it->outcome));
        }
        out += markdown_row(cells);
    }
    return out;
}

std::string render_full_matrix(const std::string& scene_dir, ReportFormat format) {
    std::vector<ConformanceReport> reports = run_matrix(scene_dir);
    std::vector<AttackMatrixRow> attacks = run_attack_matrix();
    if (format == ReportFormat::Json) {
        json j;
        json conf = json::array();
        for (const ConformanceReport& report : reports) conf.push_back(report_to_json(report));
        json atk = json::array();
        for (const AttackMatrixRow& row : attacks) atk.push_back(attack_row_json(row));
        j["conformance"] = std::move(conf);
        j["attacks"] = std::move(atk);
        return j.dump(2) + "\n";
    }
    return render_matrix(reports, format) + render_attack_matrix(attacks, format);
}

std::map<std::string, std::string> fixture_files() {
    std::map<std::string, std::string> files;
    for (Suite suite : all_suites()) {
        for (CheckId check : suite_checks(suite)) {
            Scene scene = sk::load(fixture_scene_json(suite, check));
            files[to_string(suite) + "/" + to_string(check) + ".scene.json"] =
                render_scene(scene);
        }
    }
    return files;
}

void write_fixtures(const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& [rel, content] : fixture_files()) {
        fs::path path = fs::path(dir) / rel;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write fixture " + path.string());
        out << content;
    }
}

}  // namespace autofill_sim
