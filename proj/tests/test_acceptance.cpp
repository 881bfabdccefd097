#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "autofill_sim/association.hpp"
#include "autofill_sim/attacks.hpp"
#include "autofill_sim/errors.hpp"
#include "autofill_sim/harness.hpp"
#include "autofill_sim/managers.hpp"
#include "autofill_sim/scenekit.hpp"

using namespace autofill_sim;
namespace sk = autofill_sim::scenekit;

namespace {

// One acceptance criterion: collect granular failures, then report a single
// [PASS]/[FAIL] line on stdout.
struct Criterion {
    std::string title;
    bool ok = true;
    std::vector<std::string> failures;

    explicit Criterion(std::string t) : title(std::move(t)) {}

    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (failures.size() < 8) failures.push_back(what);
    }

    bool finish() const {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << title << "\n";
        for (const std::string& f : failures) std::cout << "       - " << f << "\n";
        std::cout.flush();
        return ok;
    }
};

std::string source_dir() {
    const char* dir = std::getenv("AUTOFILL_SIM_SOURCE_DIR");
    return dir ? dir : ".";
}

std::string golden_path(Suite suite, PolicyId policy) {
    return source_dir() + "/goldens/" + to_string(suite) + "-" + to_string(policy) +
           ".golden.json";
}

const std::vector<PolicyId> kLegacy = {PolicyId::IosPasswordAutofill, PolicyId::IosExtensions,
                                       PolicyId::AndroidAutofillService};

Verdict cell(const ConformanceReport& report, CheckId check) {
    for (const ConformanceCell& c : report.cells)
        if (c.check == check) return c.verdict;
    throw InvariantError("check missing from report");
}

std::string random_password(std::mt19937& rng) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
    std::string out = "rnd-";
    for (int i = 0; i < 12; ++i) out += alphabet[pick(rng)];
    return out;
}

}  // namespace

TEST_CASE("criterion 1: browser conformance matches the goldens, 27 cells, under 5 seconds") {
    Criterion c("criterion 1: browser conformance matches the goldens (27 cells, < 5 s)");
    const std::string dir = default_scene_dir();

    auto started = std::chrono::steady_clock::now();
    std::size_t cells = 0;
    for (PolicyId policy : kLegacy) {
        ConformanceReport report = run_suite(Suite::Browser, policy, std::nullopt, dir);
        cells += report.cells.size();
        auto diffs = compare_golden(report, golden_path(Suite::Browser, policy));
        c.expect(diffs.empty(), to_string(policy) + ": " + std::to_string(diffs.size()) +
                                    " cells differ from the golden row");
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    c.expect(cells == 27, "expected 27 browser cells, saw " + std::to_string(cells));
    c.expect(elapsed < 5000, "browser suite took " + std::to_string(elapsed) + " ms");
    CHECK(c.finish());
}

TEST_CASE("criterion 2: native conformance matches the goldens, 15 cells") {
    Criterion c("criterion 2: native conformance matches the goldens (15 cells)");
    const std::string dir = default_scene_dir();

    std::size_t cells = 0;
    for (PolicyId policy : kLegacy) {
        ConformanceReport report = run_suite(Suite::Native, policy, std::nullopt, dir);
        cells += report.cells.size();
        auto diffs = compare_golden(report, golden_path(Suite::Native, policy));
        c.expect(diffs.empty(), to_string(policy) + ": " + std::to_string(diffs.size()) +
                                    " cells differ from the golden row");
    }
    c.expect(cells == 15, "expected 15 native cells, saw " + std::to_string(cells));

    ConformanceReport pa = run_suite(Suite::Native, PolicyId::IosPasswordAutofill, std::nullopt, dir);
    for (const ConformanceCell& cc : pa.cells)
        c.expect(cc.verdict == Verdict::Secure,
                 "password-autofill native " + to_string(cc.check) + " is not secure");

    ConformanceReport ext = run_suite(Suite::Native, PolicyId::IosExtensions, std::nullopt, dir);
    c.expect(cell(ext, CheckId::AppToDomain) == Verdict::Insecure,
             "extensions app-to-domain should be insecure");
    c.expect(cell(ext, CheckId::DomainToApp) == Verdict::Insecure,
             "extensions domain-to-app should be insecure");
    CHECK(c.finish());
}

TEST_CASE("criterion 3: webview conformance matches the goldens, 30 cells") {
    Criterion c("criterion 3: webview conformance matches the goldens (30 cells)");
    const std::string dir = default_scene_dir();

    std::size_t cells = 0;
    for (PolicyId policy : kLegacy) {
        ConformanceReport report = run_suite(Suite::WebView, policy, std::nullopt, dir);
        cells += report.cells.size();
        auto diffs = compare_golden(report, golden_path(Suite::WebView, policy));
        c.expect(diffs.empty(), to_string(policy) + ": " + std::to_string(diffs.size()) +
                                    " cells differ from the golden row");

        c.expect(cell(report, CheckId::WebViewHostAccess) == Verdict::Insecure,
                 to_string(policy) + ": host-app access should be insecure");
        bool iframe_secure = cell(report, CheckId::CrossOriginIframe) == Verdict::Secure;
        c.expect(iframe_secure == (policy == PolicyId::IosExtensions),
                 to_string(policy) + ": iframe cell should be secure only for extensions");
    }
    c.expect(cells == 30, "expected 30 webview cells, saw " + std::to_string(cells));
    CHECK(c.finish());
}

TEST_CASE("criterion 4: squat witnesses fool their matching name heuristics") {
    Criterion c("criterion 4: squat witnesses fool their matching name heuristics");
    const DomainName victim = DomainName::parse("walmart.com");
    const Scene scene = sk::load(sk::base_scene_json());
    std::vector<DomainName> known;
    for (const Credential& cred : scene.vault.credentials) known.push_back(cred.mapped_domain);

    struct Row {
        MappingScheme::Kind scheme;
        std::string package;
    };
    for (const Row& row : {Row{MappingScheme::Kind::Prefix, "com.walmart.evil"},
                           Row{MappingScheme::Kind::Substring, "com.wal.evil"},
                           Row{MappingScheme::Kind::PackageInversion, "com.walmart.evil"}}) {
        AppIdentity squat = squat_generator(row.scheme, victim);
        c.expect(squat.package_id == row.package,
                 to_string(row.scheme) + " squat is " + squat.package_id + ", wanted " +
                     row.package);
        MappingScheme scheme;
        scheme.kind = row.scheme;
        MappingVerdict verdict = map_by_heuristic(scheme, squat, known, scene.vault, scene);
        c.expect(verdict.decision == MappingVerdict::Decision::Verified,
                 to_string(row.scheme) + " heuristic did not map the squat");
        bool hit = false;
        for (const DomainName& d : verdict.matched_domains) hit |= (d == victim);
        c.expect(hit, to_string(row.scheme) + " squat did not map to the victim domain");
    }
    CHECK(c.finish());
}

TEST_CASE("criterion 5: attack matrix outcomes") {
    Criterion c("criterion 5: attack matrix outcomes");
    using Result = AttackOutcome::Result;

    for (PolicyId policy : kLegacy) {
        AttackOutcome out = run_attack(AttackKind::WebViewMaliciousApp, policy, std::nullopt,
                                       UserAgent::AlwaysApprove);
        c.expect(out.result == Result::UserGatedStolen,
                 "malicious-app should steal under " + to_string(policy));
    }
    AttackOutcome hardened = run_attack(AttackKind::WebViewMaliciousApp, PolicyId::SecureModel,
                                        std::nullopt, UserAgent::AlwaysApprove);
    c.expect(hardened.result == Result::Blocked, "malicious-app should be blocked when secrets "
                                                 "substitute at transmission");

    // A malicious page inside a mapped host app robs exactly the managers
    // that resolve webview fills through the app mapping.
    for (PolicyId policy : {PolicyId::IosExtensions, PolicyId::AndroidAutofillService}) {
        for (const ManagerPreset& preset : manager_presets()) {
            if (!manager_supports(preset, policy)) continue;
            std::optional<ManagerProfile> prof = profile_for(preset, policy);
            if (!prof) continue;
            AttackOutcome out = run_attack(AttackKind::WebViewMaliciousPage, policy, prof,
                                           UserAgent::AlwaysApprove);
            bool by_app = prof->webview_policy == ManagerProfile::WebViewPolicy::ByAppMapping;
            if (by_app) {
                c.expect(out.result == Result::UserGatedStolen,
                         preset.id + " on " + to_string(policy) +
                             " maps by app but did not lose the credential");
                c.expect(out.credential_ids == std::vector<std::string>{"cred-walmart"},
                         preset.id + " should lose exactly the host app's credential");
            } else {
                c.expect(out.credential_ids.empty(),
                         preset.id + " on " + to_string(policy) + " should not lose anything");
            }
        }
    }
    for (PolicyId policy : {PolicyId::IosPasswordAutofill, PolicyId::SecureModel}) {
        for (const ManagerPreset& preset : manager_presets()) {
            if (!manager_supports(preset, policy)) continue;
            AttackOutcome out = run_attack(AttackKind::WebViewMaliciousPage, policy,
                                           profile_for(preset, policy), UserAgent::AlwaysApprove);
            c.expect(out.result == Result::Blocked && out.credential_ids.empty(),
                     preset.id + " under " + to_string(policy) +
                         " must not fall for the malicious page");
        }
    }

    AttackOutcome framed_ext = run_attack(AttackKind::CrossOriginIframePhish,
                                          PolicyId::IosExtensions, std::nullopt,
                                          UserAgent::AlwaysApprove);
    c.expect(framed_ext.result == Result::Blocked, "extensions should block the iframe phish");
    AttackOutcome framed_pa = run_attack(AttackKind::CrossOriginIframePhish,
                                         PolicyId::IosPasswordAutofill, std::nullopt,
                                         UserAgent::AlwaysApprove);
    c.expect(framed_pa.result == Result::UserGatedStolen,
             "password-autofill should lose the framed credential after user approval");
    CHECK(c.finish());
}

TEST_CASE("criterion 6: bidirectional mapping verifies only when all four clauses hold") {
    Criterion c("criterion 6: bidirectional mapping verifies only when all four clauses hold");
    const DomainName domain = DomainName::parse("walmart.com");
    const std::string good_fp = fingerprint("walmart-release-key");
    const std::string evil_fp = fingerprint("attacker-key");

    for (unsigned mask = 0; mask < 16; ++mask) {
        const bool entitled = mask & 1;
        const bool listed = mask & 2;
        const bool fp_match = mask & 4;
        const bool fetched_securely = mask & 8;

        AppIdentity app;
        app.package_id = "com.walmart.app";
        app.signing_fingerprint = good_fp;
        if (entitled) app.entitled_domains = {domain};

        SiteAssociationFile assoc;
        assoc.platform = AssociationPlatform::DalStyle;
        if (listed) assoc.entries = {{"com.walmart.app", fp_match ? good_fp : evil_fp}};

        MappingVerdict verdict = verify_bidirectional(
            app, domain, assoc,
            fetched_securely ? ConnectionSecurity::https() : ConnectionSecurity::http());

        const bool want_verified = entitled && listed && fp_match && fetched_securely;
        c.expect((verdict.decision == MappingVerdict::Decision::Verified) == want_verified,
                 "clause mask " + std::to_string(mask) + " produced " +
                     to_string(verdict.decision));

        if (want_verified) {
            AppIdentity look_alike = app;
            look_alike.signing_fingerprint = evil_fp;
            MappingVerdict mutated = verify_bidirectional(look_alike, domain, assoc,
                                                          ConnectionSecurity::https());
            c.expect(mutated.decision == MappingVerdict::Decision::NotVerified &&
                         mutated.reason == kReasonFingerprintMismatch,
                     "a look-alike mutation must fail with a fingerprint mismatch");
        }
    }
    CHECK(c.finish());
}

TEST_CASE("criterion 7: the user gate holds over 1000 randomized scenes") {
    Criterion c("criterion 7: the user gate holds over 1000 randomized scenes");
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> extra_creds(0, 3);
    std::uniform_int_distribution<int> pick_domain(0, 3);
    std::uniform_int_distribution<int> pick_ctx(0, 2);
    const std::vector<std::string> domains = {"walmart.com", "shop.com", "example.org",
                                              "evil.com"};

    int rounds_with_offer = 0;
    for (int round = 0; round < 1000 && c.ok; ++round) {
        nlohmann::json scene_json = sk::base_scene_json();
        const int extras = extra_creds(rng);
        for (int i = 0; i < extras; ++i)
            scene_json["vault"]["credentials"].push_back(
                sk::credential("cred-rnd-" + std::to_string(round) + "-" + std::to_string(i),
                               "user" + std::to_string(i), random_password(rng),
                               domains[pick_domain(rng)]));
        Scene scene = sk::load(scene_json);

        std::set<std::string> secrets;
        for (const Credential& cred : scene.vault.credentials)
            secrets.insert(cred.password.reveal());

        FillContext ctx;
        switch (pick_ctx(rng)) {
            case 0:
                ctx = make_browser_context(
                    scene.find_document(DomainName::parse("walmart.com"), sk::kLoginPath)->parsed);
                break;
            case 1:
                ctx = make_native_context(*scene.find_app(sk::kVictimApp),
                                          DomainName::parse("walmart.com"));
                break;
            default:
                ctx = make_webview_context(
                    *scene.find_app(sk::kHostApp),
                    scene.find_document(DomainName::parse("walmart.com"), sk::kLoginPath)->parsed);
                break;
        }

        for (PolicyId policy : all_policies()) {
            CeremonyOptions opts;
            opts.user_override = UserAgent::AlwaysDeny;
            opts.seed = "acceptance7:" + std::to_string(round);
            CeremonyResult r = run_ceremony(policy, std::nullopt, ctx, scene, opts);

            if (!r.decision.offered.empty()) {
                ++rounds_with_offer;
                c.expect(r.decision.gate == FillDecision::Gate::UserGateRequired,
                         "round " + std::to_string(round) + ": offer without a user gate");
            }
            c.expect(!r.filled.filled,
                     "round " + std::to_string(round) + ": fill despite the user declining");

            auto leaked = [&](const std::string& value) { return secrets.count(value) > 0; };
            for (const auto& [key, value] : r.filled.fill.values)
                c.expect(!leaked(value), "round " + std::to_string(round) + ": secret in document");
            for (const Exfiltration& ex : r.exfiltrations)
                for (const auto& [field, value] : ex.values)
                    c.expect(!leaked(value),
                             "round " + std::to_string(round) + ": secret exfiltrated");
            if (r.request) {
                for (const auto& [field, value] : r.request->body_params)
                    c.expect(!leaked(value),
                             "round " + std::to_string(round) + ": secret in request body");
                for (const auto& [field, value] : r.request->url_params)
                    c.expect(!leaked(value),
                             "round " + std::to_string(round) + ": secret in request url");
            }
        }
    }
    c.expect(rounds_with_offer > 500, "property is vacuous: only " +
                                          std::to_string(rounds_with_offer) +
                                          " policy runs offered credentials");
    CHECK(c.finish());
}

TEST_CASE("criterion 8: transmission-time substitution survives 1000 random script storms") {
    Criterion c("criterion 8: transmission-time substitution survives 1000 random script storms");
    const Scene scene = sk::load(sk::base_scene_json());
    const Document login =
        scene.find_document(DomainName::parse("walmart.com"), sk::kLoginPath)->parsed;

    std::set<std::string> secrets;
    for (const Credential& cred : scene.vault.credentials) secrets.insert(cred.password.reveal());

    const Origin attacker{DomainName::parse("evil.com"), ConnectionSecurity::https()};
    const Origin victim{DomainName::parse("walmart.com"), ConnectionSecurity::https()};

    std::mt19937 rng(8);
    std::uniform_int_distribution<int> script_count(0, 5);
    std::uniform_int_distribution<int> pick_phase(0, 2);
    std::uniform_int_distribution<int> pick_action(0, 2);
    std::uniform_int_distribution<int> pick_dest(0, 9);

    int secret_sent = 0;
    int refusals_checked = 0;
    for (int round = 0; round < 1000 && c.ok; ++round) {
        Document doc = login;
        bool dynamic_rewrite = false;
        const int script_total = script_count(rng);
        for (int i = 0; i < script_total; ++i) {
            ScriptEvent ev;
            ev.phase = static_cast<ScriptPhase>(pick_phase(rng));
            ev.injected_by = ScriptOrigin::Page;
            switch (pick_action(rng)) {
                case 0:
                    ev.action = ScriptAction::ScrapeFields;
                    ev.form_index = 0;
                    break;
                case 1:
                    ev.action = ScriptAction::ExfiltrateTo;
                    ev.to_origin = pick_dest(rng) < 7 ? attacker : victim;
                    break;
                default:
                    ev.action = ScriptAction::RewriteAction;
                    ev.form_index = 0;
                    ev.to_origin = attacker;
                    ev.to_path = "/steal";
                    if (ev.phase != ScriptPhase::OnLoad) dynamic_rewrite = true;
                    break;
            }
            doc.scripts.push_back(ev);
        }

        CeremonyOptions opts;
        opts.seed = "acceptance8:" + std::to_string(round);
        CeremonyResult r = run_ceremony(PolicyId::SecureModel, std::nullopt,
                                        make_browser_context(doc), scene, opts);

        for (const auto& [key, value] : r.filled.fill.values)
            c.expect(secrets.count(value) == 0,
                     "round " + std::to_string(round) + ": real secret visible in the document");
        for (const Exfiltration& ex : r.exfiltrations)
            for (const auto& [field, value] : ex.values)
                c.expect(secrets.count(value) == 0,
                         "round " + std::to_string(round) + ": real secret reached a script sink");

        if (r.request) {
            auto targets_fill_action = r.request->destination.same_origin(r.decision.decision_action);
            for (const auto& [field, value] : r.request->body_params)
                if (secrets.count(value) > 0) {
                    ++secret_sent;
                    c.expect(targets_fill_action, "round " + std::to_string(round) +
                                                      ": secret sent away from the fill action");
                }
            for (const auto& [field, value] : r.request->url_params)
                if (secrets.count(value) > 0) {
                    ++secret_sent;
                    c.expect(targets_fill_action, "round " + std::to_string(round) +
                                                      ": secret sent away from the fill action");
                }
        }

        if (r.filled.filled && dynamic_rewrite) {
            ++refusals_checked;
            c.expect(r.refusal.has_value() && r.refusal->reason == "action-origin-changed",
                     "round " + std::to_string(round) +
                         ": dynamic action rewrite must refuse transmission");
            c.expect(!r.request.has_value(),
                     "round " + std::to_string(round) + ": refused round still sent a request");
        }
    }
    c.expect(secret_sent > 100, "property is vacuous: only " + std::to_string(secret_sent) +
                                    " rounds transmitted a real secret");
    c.expect(refusals_checked > 100, "property is vacuous: only " +
                                         std::to_string(refusals_checked) +
                                         " rounds exercised a dynamic rewrite");
    CHECK(c.finish());
}

TEST_CASE("criterion 9: matrix renderings are byte-deterministic") {
    Criterion c("criterion 9: matrix renderings are byte-deterministic");
    const std::string dir = default_scene_dir();
    for (ReportFormat format : {ReportFormat::Markdown, ReportFormat::Json}) {
        std::string first = render_full_matrix(dir, format);
        std::string second = render_full_matrix(dir, format);
        c.expect(!first.empty(), "matrix rendering is empty");
        c.expect(first == second, "two matrix runs differ");
    }
    CHECK(c.finish());
}
