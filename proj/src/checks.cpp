#include "autofill_sim/checks.hpp"

#include <array>
#include <utility>

namespace autofill_sim {

namespace {

constexpr std::array<std::pair<CheckId, std::string_view>, 13> kCheckNames = {{
    {CheckId::InteractionRequired, "interaction-required"},
    {CheckId::DomainMapping, "domain-mapping"},
    {CheckId::HttpsDowngrade, "https-downgrade"},
    {CheckId::BadCert, "bad-cert"},
    {CheckId::ActionStatic, "action-static"},
    {CheckId::ActionDynamic, "action-dynamic"},
    {CheckId::MethodGet, "method-get"},
    {CheckId::CrossOriginIframe, "cross-origin-iframe"},
    {CheckId::FillOnTransmission, "fill-on-transmission"},
    {CheckId::AppToDomain, "app-to-domain"},
    {CheckId::DomainToApp, "domain-to-app"},
    {CheckId::OtherAppAccess, "other-app-access"},
    {CheckId::WebViewHostAccess, "webview-host-access"},
}};

constexpr std::array<std::pair<Verdict, std::string_view>, 5> kVerdictNames = {{
    {Verdict::Secure, "secure"},
    {Verdict::Partial, "partial"},
    {Verdict::Insecure, "insecure"},
    {Verdict::Delegated, "delegated"},
    {Verdict::NotApplicable, "not-applicable"},
}};

}  // namespace

std::string to_string(CheckId id) {
    for (const auto& [check, name] : kCheckNames) {
        if (check == id) return std::string(name);
    }
    return "unknown";
}

std::optional<CheckId> parse_check_id(std::string_view text) {
    for (const auto& [check, name] : kCheckNames) {
        if (name == text) return check;
    }
    return std::nullopt;
}

std::string to_string(Verdict v) {
    for (const auto& [verdict, name] : kVerdictNames) {
        if (verdict == v) return std::string(name);
    }
    return "unknown";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
    for (const auto& [verdict, name] : kVerdictNames) {
        if (name == text) return verdict;
    }
    return std::nullopt;
}

std::string verdict_glyph(Verdict v) {
    switch (v) {
        case Verdict::Secure: return "●";      // ●
        case Verdict::Partial: return "◐";     // ◐
        case Verdict::Insecure: return "○";    // ○
        case Verdict::Delegated: return "✎";   // ✎
        case Verdict::NotApplicable: return "—";  // —
    }
    return "?";
}

}  // namespace autofill_sim
