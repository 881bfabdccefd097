#include "autofill_sim/frameworks.hpp"

#include <algorithm>
#include <map>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

namespace {

using Gate = FillDecision::Gate;
using FillMode = FillDecision::FillMode;
using Kind = FillContext::Kind;

void annotate(FillDecision& d, CheckId check, Verdict verdict) {
    d.checks.emplace_back(check, verdict);
}

std::optional<Detection> pick_detection(const Document& doc, const std::optional<FormRef>& target) {
    std::vector<Detection> all = detect_all(doc);
    if (!target) {
        if (all.empty()) return std::nullopt;
        return all.front();
    }
    for (const Detection& d : all)
        if (d.ref == *target) return d;
    return std::nullopt;
}

std::vector<Credential> creds_for_domains(const Vault& vault,
                                          const std::vector<DomainName>& domains,
                                          const SuffixList& suffixes) {
    std::vector<Credential> out;
    for (const DomainName& d : domains) {
        auto some = credentials_for_domain(vault, Origin{d, ConnectionSecurity::https()}, suffixes);
        for (auto& c : some) {
            bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const Credential& o) { return o.id == c.id; });
            if (!seen) out.push_back(std::move(c));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Credential& a, const Credential& b) { return a.id < b.id; });
    return out;
}

std::vector<DomainName> vault_known_domains(const Vault& vault) {
    std::vector<DomainName> out;
    out.reserve(vault.credentials.size());
    for (const Credential& c : vault.credentials) out.push_back(c.mapped_domain);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Result of resolving which domains an app may fill for.
struct NativeMapping {
    std::vector<DomainName> domains;
    std::optional<std::string> warning;
    std::string block_reason;  // set when domains stays empty
};

NativeMapping verified_entitlements(const AppIdentity& app, const Scene& scene) {
    NativeMapping m;
    std::string first_reason;
    for (const DomainName& d : app.entitled_domains) {
        MappingVerdict v = verify_bidirectional_in_scene(app, d, scene);
        if (v.decision == MappingVerdict::Decision::Verified)
            m.domains.push_back(d);
        else if (first_reason.empty())
            first_reason = v.reason;
    }
    if (m.domains.empty())
        m.block_reason = app.entitled_domains.empty() ? kReasonEntitlementMissing : first_reason;
    return m;
}

NativeMapping map_app_to_domains(PolicyId policy, const ManagerProfile& prof,
                                 const AppIdentity& app,
                                 const std::optional<DomainName>& requested, const Scene& scene) {
    NativeMapping m;
    switch (policy) {
        case PolicyId::IosPasswordAutofill:
        case PolicyId::SecureModel:
            return verified_entitlements(app, scene);
        case PolicyId::IosExtensions:
            // The extension trusts whatever domain the app hands it.
            if (requested)
                m.domains.push_back(*requested);
            else
                m.domains = app.entitled_domains;
            if (m.domains.empty()) m.block_reason = "no-domain-requested";
            return m;
        case PolicyId::AndroidAutofillService: {
            if (prof.native_scheme.kind == MappingScheme::Kind::Bidirectional)
                return verified_entitlements(app, scene);
            MappingVerdict v = map_by_heuristic(prof.native_scheme, app,
                                                vault_known_domains(scene.vault), scene.vault,
                                                scene);
            switch (v.decision) {
                case MappingVerdict::Decision::Verified:
                    m.domains = v.matched_domains;
                    break;
                case MappingVerdict::Decision::UserConfirmRequired:
                    m.domains = v.matched_domains;
                    if (m.domains.empty())
                        m.block_reason = kReasonNoHeuristicMatch;
                    else
                        m.warning = "unverified app-to-domain mapping; user must confirm";
                    break;
                case MappingVerdict::Decision::NotVerified:
                    m.block_reason = v.reason;
                    break;
            }
            return m;
        }
    }
    throw InvariantError("unknown policy id");
}

// Anomaly checks shared by browser pages and webviews. Legacy models note
// the anomaly and keep going; the secure model refuses instead.
void apply_page_checks(FillDecision& d, PolicyId policy, const ManagerProfile& prof,
                       const Origin& page, const Form& form, bool cross_origin) {
    const bool secure = policy == PolicyId::SecureModel;
    auto refuse_with = [&](CheckId check) {
        if (!d.refused_by) d.refused_by = check;
    };

    if (cross_origin) {
        bool blocks = secure || policy == PolicyId::IosExtensions ||
                      (policy == PolicyId::AndroidAutofillService &&
                       prof.iframe_policy == ManagerProfile::IframePolicy::Block);
        annotate(d, CheckId::CrossOriginIframe, blocks ? Verdict::Secure : Verdict::Insecure);
        if (blocks) refuse_with(CheckId::CrossOriginIframe);
    }
    if (page.security.kind == ConnectionSecurity::Kind::Http) {
        annotate(d, CheckId::HttpsDowngrade, secure ? Verdict::Secure : Verdict::Insecure);
        if (secure) refuse_with(CheckId::HttpsDowngrade);
    }
    if (page.security.kind == ConnectionSecurity::Kind::HttpsInvalidCert) {
        annotate(d, CheckId::BadCert, secure ? Verdict::Secure : Verdict::Insecure);
        if (secure) refuse_with(CheckId::BadCert);
    }
    if (form.action_origin.domain != page.domain) {
        annotate(d, CheckId::ActionStatic, secure ? Verdict::Secure : Verdict::Insecure);
        if (secure) refuse_with(CheckId::ActionStatic);
    } else if (secure && !(form.action_origin == page)) {
        // Same domain but the action's transport is weaker than the page's.
        refuse_with(CheckId::ActionStatic);
    }
    if (form.method == Method::Get) {
        annotate(d, CheckId::MethodGet, secure ? Verdict::Secure : Verdict::Insecure);
        if (secure) refuse_with(CheckId::MethodGet);
    }
}

void run_phase_over_tree(Document& doc, ScriptPhase phase, const FramePath& here,
                         const std::optional<FormRef>& target, const FillState& fill,
                         std::map<FramePath, ScriptVm>& vms, bool host_scripts_allowed,
                         std::vector<Exfiltration>& out) {
    static const FillState kNoFill;
    const FillState& node_fill = (target && target->frame_path == here) ? fill : kNoFill;
    auto batch = run_script_phase(doc, phase, node_fill, vms[here], host_scripts_allowed);
    out.insert(out.end(), batch.begin(), batch.end());
    for (std::size_t i = 0; i < doc.frames.size(); ++i) {
        FramePath sub = here;
        sub.push_back(i);
        run_phase_over_tree(doc.frames[i].doc, phase, sub, target, fill, vms,
                            host_scripts_allowed, out);
    }
}

}  // namespace

std::string to_string(PolicyId id) {
    switch (id) {
        case PolicyId::IosExtensions:
            return "ios-extensions";
        case PolicyId::IosPasswordAutofill:
            return "ios-password-autofill";
        case PolicyId::AndroidAutofillService:
            return "android-autofill-service";
        case PolicyId::SecureModel:
            return "secure-model";
    }
    throw InvariantError("unknown policy id");
}

std::optional<PolicyId> parse_policy_id(std::string_view text) {
    for (PolicyId id : all_policies())
        if (to_string(id) == text) return id;
    return std::nullopt;
}

const std::vector<PolicyId>& all_policies() {
    static const std::vector<PolicyId> ids = {
        PolicyId::IosPasswordAutofill,
        PolicyId::IosExtensions,
        PolicyId::AndroidAutofillService,
        PolicyId::SecureModel,
    };
    return ids;
}

std::string to_string(ManagerProfile::WebViewPolicy p) {
    switch (p) {
        case ManagerProfile::WebViewPolicy::ByPageDomain:
            return "by-page-domain";
        case ManagerProfile::WebViewPolicy::ByAppMapping:
            return "by-app-mapping";
        case ManagerProfile::WebViewPolicy::Refuse:
            return "refuse";
    }
    throw InvariantError("unknown webview policy");
}

std::string to_string(ManagerProfile::IframePolicy p) {
    switch (p) {
        case ManagerProfile::IframePolicy::Fill:
            return "fill";
        case ManagerProfile::IframePolicy::Block:
            return "block";
    }
    throw InvariantError("unknown iframe policy");
}

std::optional<ManagerProfile::WebViewPolicy> parse_webview_policy(std::string_view text) {
    if (text == "by-page-domain") return ManagerProfile::WebViewPolicy::ByPageDomain;
    if (text == "by-app-mapping") return ManagerProfile::WebViewPolicy::ByAppMapping;
    if (text == "refuse") return ManagerProfile::WebViewPolicy::Refuse;
    return std::nullopt;
}

std::optional<ManagerProfile::IframePolicy> parse_iframe_policy(std::string_view text) {
    if (text == "fill") return ManagerProfile::IframePolicy::Fill;
    if (text == "block") return ManagerProfile::IframePolicy::Block;
    return std::nullopt;
}

ManagerProfile framework_default_profile() {
    ManagerProfile prof;
    prof.id = "framework-default";
    prof.name = "Framework default";
    prof.native_scheme.kind = MappingScheme::Kind::Manual;
    prof.webview_policy = ManagerProfile::WebViewPolicy::ByPageDomain;
    prof.iframe_policy = ManagerProfile::IframePolicy::Fill;
    return prof;
}

Document make_native_login_doc(const DomainName& domain, bool annotated) {
    Document doc;
    doc.origin = Origin{domain, ConnectionSecurity::https()};

    Field username;
    username.name = "username";
    username.kind = annotated ? FieldKind::Username : FieldKind::Other;
    username.other_type = annotated ? "" : "custom";

    Field password;
    password.name = "password";
    password.kind = annotated ? FieldKind::Password : FieldKind::Other;
    password.other_type = annotated ? "" : "custom";

    Form form;
    form.action_origin = doc.origin;
    form.action_path = "/native-login";
    form.method = Method::Post;
    form.fields = {username, password};
    doc.forms.push_back(std::move(form));
    return doc;
}

FillContext make_browser_context(Document doc) {
    FillContext ctx;
    ctx.kind = Kind::BrowserPage;
    ctx.doc = std::move(doc);
    return ctx;
}

FillContext make_native_context(AppIdentity app, const DomainName& requested_domain,
                                bool annotated) {
    FillContext ctx;
    ctx.kind = Kind::NativeUi;
    ctx.doc = make_native_login_doc(requested_domain, annotated);
    ctx.app = std::move(app);
    ctx.annotated = annotated;
    ctx.requested_domain = requested_domain;
    return ctx;
}

FillContext make_webview_context(AppIdentity host, Document doc,
                                 std::vector<ScriptEvent> host_scripts) {
    FillContext ctx;
    ctx.kind = Kind::WebViewInApp;
    ctx.doc = std::move(doc);
    ctx.app = std::move(host);
    for (ScriptEvent& ev : host_scripts) ev.injected_by = ScriptOrigin::HostApp;
    ctx.host_scripts = std::move(host_scripts);
    return ctx;
}

FillDecision suggest(PolicyId policy, const std::optional<ManagerProfile>& manager,
                     const FillContext& ctx, const Scene& scene) {
    FillDecision d;
    d.gate = Gate::UserGateRequired;
    d.fill_mode =
        policy == PolicyId::SecureModel ? FillMode::OnTransmission : FillMode::IntoDocument;
    const ManagerProfile prof = manager ? *manager : framework_default_profile();
    const SuffixList suffixes = scene.suffixes();

    std::optional<Detection> detection = pick_detection(ctx.doc, ctx.target);
    if (!detection) {
        if (ctx.kind == Kind::NativeUi)
            throw UnsupportedContextError("no autofill-visible login fields in the native ui");
        d.note = "no-login-form";
        annotate(d, CheckId::InteractionRequired, Verdict::Secure);
        return d;
    }
    d.detection = detection;
    const Document& target_doc = document_at(ctx.doc, detection->ref.frame_path);
    const Form& form = target_doc.forms.at(detection->ref.form_index);
    d.decision_action = form.action_origin;
    d.decision_action_path = form.action_path;

    std::vector<Credential> candidates;

    switch (ctx.kind) {
        case Kind::BrowserPage: {
            candidates = credentials_for_domain(scene.vault, target_doc.origin, suffixes);
            if (candidates.empty()) d.note = "no-credentials-for-domain";
            apply_page_checks(d, policy, prof, target_doc.origin, form,
                              is_cross_origin(ctx.doc, detection->ref.frame_path));
            break;
        }
        case Kind::NativeUi: {
            NativeMapping m = map_app_to_domains(policy, prof, ctx.app, ctx.requested_domain,
                                                 scene);
            candidates = creds_for_domains(scene.vault, m.domains, suffixes);
            d.warning = m.warning;
            if (m.domains.empty())
                d.note = m.block_reason;
            else if (candidates.empty())
                d.note = "no-credentials-for-domain";
            break;
        }
        case Kind::WebViewInApp: {
            auto wp = (policy == PolicyId::IosPasswordAutofill || policy == PolicyId::SecureModel)
                          ? ManagerProfile::WebViewPolicy::ByPageDomain
                          : prof.webview_policy;
            switch (wp) {
                case ManagerProfile::WebViewPolicy::ByPageDomain:
                    candidates = credentials_for_domain(scene.vault, target_doc.origin, suffixes);
                    if (candidates.empty()) d.note = "no-credentials-for-domain";
                    break;
                case ManagerProfile::WebViewPolicy::ByAppMapping: {
                    NativeMapping m;
                    if (policy == PolicyId::IosExtensions) {
                        // The extension sees only what the host app claims.
                        m.domains = ctx.app.entitled_domains;
                        if (m.domains.empty()) m.block_reason = kReasonEntitlementMissing;
                    } else {
                        m = map_app_to_domains(policy, prof, ctx.app, std::nullopt, scene);
                    }
                    candidates = creds_for_domains(scene.vault, m.domains, suffixes);
                    d.warning = m.warning;
                    if (m.domains.empty())
                        d.note = m.block_reason;
                    else if (candidates.empty())
                        d.note = "no-credentials-for-domain";
                    break;
                }
                case ManagerProfile::WebViewPolicy::Refuse:
                    d.note = "webview-autofill-refused";
                    break;
            }
            apply_page_checks(d, policy, prof, target_doc.origin, form,
                              is_cross_origin(ctx.doc, detection->ref.frame_path));
            break;
        }
    }

    if (d.refused_by) candidates.clear();

    if (!candidates.empty()) {
        if (ctx.kind != Kind::NativeUi) {
            bool all_page = std::all_of(candidates.begin(), candidates.end(),
                                        [&](const Credential& c) {
                                            return c.mapped_domain.same_registrable(
                                                target_doc.origin.domain, suffixes);
                                        });
            annotate(d, CheckId::DomainMapping,
                     all_page ? Verdict::Secure : Verdict::Insecure);
        }
        annotate(d, CheckId::FillOnTransmission,
                 d.fill_mode == FillMode::OnTransmission ? Verdict::Secure : Verdict::Insecure);
    }
    annotate(d, CheckId::InteractionRequired,
             d.gate == Gate::UserGateRequired ? Verdict::Secure : Verdict::Insecure);

    d.offered = std::move(candidates);
    return d;
}

FilledState execute_fill(const FillDecision& decision, UserAgent user, const Scene& scene,
                         const std::string& seed) {
    (void)scene;
    if (decision.gate == Gate::NoGate && !decision.offered.empty())
        throw GateBypassError("credentials may not be filled without passing the user gate");

    FilledState st;
    st.mode = decision.fill_mode;
    st.detection = decision.detection;
    if (decision.offered.empty() || !decision.detection) return st;
    if (user == UserAgent::AlwaysDeny) return st;

    const Credential& cred = decision.offered.front();
    const Detection& det = *decision.detection;
    st.fill.set(det.ref.form_index, det.username_field, cred.username);
    if (decision.fill_mode == FillMode::IntoDocument) {
        st.fill.set(det.ref.form_index, det.password_field, cred.password.reveal());
    } else {
        std::string nonce = fingerprint(seed + ":" + cred.id + ":0").substr(0, 16);
        std::string token = make_placeholder(cred.id, nonce);
        st.fill.set(det.ref.form_index, det.password_field, token);
        SubstitutionMap sub;
        sub.issued_for = decision.decision_action;
        sub.tokens.emplace(token, cred.password);
        st.substitution = std::move(sub);
    }
    st.used = cred;
    st.filled = true;
    return st;
}

TransmissionResult complete_transmission(const FilledState& filled, const Document& current_doc) {
    TransmissionResult out;
    if (!filled.filled || !filled.detection) return out;

    const Document& target_doc = document_at(current_doc, filled.detection->ref.frame_path);
    std::size_t index = filled.detection->ref.form_index;
    if (index >= target_doc.forms.size()) {
        out.refusal = Refusal{"form-disappeared"};
        return out;
    }
    const Form& form = target_doc.forms[index];

    if (filled.mode == FillMode::OnTransmission) {
        if (!filled.substitution) {
            out.refusal = Refusal{"missing-substitution-map"};
            return out;
        }
        if (!(form.action_origin == filled.substitution->issued_for)) {
            out.refusal = Refusal{"action-origin-changed"};
            return out;
        }
        try {
            out.request = submit_form(target_doc, index, filled.fill, filled.substitution);
        } catch (const MissingSubstitutionError& err) {
            out.refusal = Refusal{err.what()};
        }
        return out;
    }

    out.request = submit_form(target_doc, index, filled.fill, std::nullopt);
    return out;
}

CeremonyResult run_ceremony(PolicyId policy, const std::optional<ManagerProfile>& manager,
                            const FillContext& ctx, const Scene& scene,
                            const CeremonyOptions& opts) {
    CeremonyResult r;
    Document doc = ctx.doc;
    const bool webview = ctx.kind == Kind::WebViewInApp;
    if (webview) {
        for (ScriptEvent ev : ctx.host_scripts) {
            ev.injected_by = ScriptOrigin::HostApp;
            doc.scripts.push_back(ev);
        }
    }

    std::map<FramePath, ScriptVm> vms;
    const FillState no_fill;
    run_phase_over_tree(doc, ScriptPhase::OnLoad, {}, std::nullopt, no_fill, vms, webview,
                        r.exfiltrations);

    FillContext current = ctx;
    current.doc = doc;
    r.decision = suggest(policy, manager, current, scene);
    std::optional<FormRef> target =
        r.decision.detection ? std::optional<FormRef>(r.decision.detection->ref) : std::nullopt;

    run_phase_over_tree(doc, ScriptPhase::PreFill, {}, target, no_fill, vms, webview,
                        r.exfiltrations);

    UserAgent user = opts.user_override.value_or(scene.user_agent);
    r.filled = execute_fill(r.decision, user, scene, opts.seed);

    run_phase_over_tree(doc, ScriptPhase::PostFill, {}, target, r.filled.fill, vms, webview,
                        r.exfiltrations);

    if (opts.submit && r.filled.filled) {
        TransmissionResult t = complete_transmission(r.filled, doc);
        r.request = t.request;
        r.refusal = t.refusal;
    }

    r.final_doc = std::move(doc);
    return r;
}

}  // namespace autofill_sim
