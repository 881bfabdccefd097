#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autofill_sim/association.hpp"
#include "autofill_sim/checks.hpp"
#include "autofill_sim/domain.hpp"
#include "autofill_sim/scene.hpp"
#include "autofill_sim/webdoc.hpp"

namespace autofill_sim {

enum class PolicyId {
    IosExtensions,
    IosPasswordAutofill,
    AndroidAutofillService,
    SecureModel,
};

std::string to_string(PolicyId id);
std::optional<PolicyId> parse_policy_id(std::string_view text);
const std::vector<PolicyId>& all_policies();

struct ManagerProfile {
    enum class WebViewPolicy { ByPageDomain, ByAppMapping, Refuse };
    enum class IframePolicy { Fill, Block };

    std::string id;    // stable kebab-case id, e.g. "1password"
    std::string name;  // display name
    MappingScheme native_scheme;
    WebViewPolicy webview_policy = WebViewPolicy::ByPageDomain;
    IframePolicy iframe_policy = IframePolicy::Fill;
    bool warns_on_manual = false;
};

std::string to_string(ManagerProfile::WebViewPolicy p);
std::string to_string(ManagerProfile::IframePolicy p);
std::optional<ManagerProfile::WebViewPolicy> parse_webview_policy(std::string_view text);
std::optional<ManagerProfile::IframePolicy> parse_iframe_policy(std::string_view text);

// Behavior assumed for delegated decisions when no manager profile is
// supplied: fill iframes, map webviews by page domain, manual native mapping.
ManagerProfile framework_default_profile();

struct FillContext {
    enum class Kind { BrowserPage, NativeUi, WebViewInApp };

    Kind kind = Kind::BrowserPage;
    Document doc;  // the page; for NativeUi a synthetic document of native fields
    AppIdentity app;  // NativeUi: the requesting app; WebViewInApp: the host app
    bool annotated = false;                       // NativeUi field annotations present
    std::optional<DomainName> requested_domain;   // NativeUi: domain the app asks for
    std::vector<ScriptEvent> host_scripts;        // WebViewInApp, injected_by = HostApp
    std::optional<FormRef> target;                // absent: auto-detect the first login form
};

// Synthetic one-form document standing in for an app's native login fields.
Document make_native_login_doc(const DomainName& domain, bool annotated);

FillContext make_browser_context(Document doc);
FillContext make_native_context(AppIdentity app, const DomainName& requested_domain,
                                bool annotated = true);
FillContext make_webview_context(AppIdentity host, Document doc,
                                 std::vector<ScriptEvent> host_scripts = {});

struct FillDecision {
    enum class Gate { UserGateRequired, NoGate };
    enum class FillMode { IntoDocument, OnTransmission };

    Gate gate = Gate::UserGateRequired;
    std::vector<Credential> offered;  // ordered by credential id
    FillMode fill_mode = FillMode::IntoDocument;
    std::vector<std::pair<CheckId, Verdict>> checks;  // contextual annotations
    std::optional<std::string> warning;

    // Why nothing was offered, when that was a policy refusal.
    std::optional<CheckId> refused_by;
    std::string note;  // mapping failure reason or similar

    // Where the fill would land, resolved at decision time.
    std::optional<Detection> detection;
    Origin decision_action;  // the target form's action origin when decided
    std::string decision_action_path;
};

struct FilledState {
    bool filled = false;
    FillState fill;  // keyed within the target document
    FillDecision::FillMode mode = FillDecision::FillMode::IntoDocument;
    std::optional<SubstitutionMap> substitution;  // OnTransmission only
    std::optional<Credential> used;
    std::optional<Detection> detection;
};

struct Refusal {
    std::string reason;
};

struct TransmissionResult {
    std::optional<OutboundRequest> request;
    std::optional<Refusal> refusal;
};

FillDecision suggest(PolicyId policy, const std::optional<ManagerProfile>& manager,
                     const FillContext& ctx, const Scene& scene);

FilledState execute_fill(const FillDecision& decision, UserAgent user, const Scene& scene,
                         const std::string& seed);

// Re-validates the (possibly script-mutated) action before letting secrets
// out; OnTransmission substitution happens only here.
TransmissionResult complete_transmission(const FilledState& filled, const Document& current_doc);

struct CeremonyOptions {
    std::optional<UserAgent> user_override;
    bool submit = true;
    std::string seed = "ceremony";
};

struct CeremonyResult {
    FillDecision decision;
    FilledState filled;
    std::vector<Exfiltration> exfiltrations;
    std::optional<OutboundRequest> request;
    std::optional<Refusal> refusal;
    Document final_doc;
};

// The whole autofill ceremony: onload scripts, detection + decision, prefill
// scripts, the user gate and fill, postfill scripts, then transmission.
CeremonyResult run_ceremony(PolicyId policy, const std::optional<ManagerProfile>& manager,
                            const FillContext& ctx, const Scene& scene,
                            const CeremonyOptions& opts = {});

}  // namespace autofill_sim
