#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace autofill_sim {

// One column of the conformance matrices. WebViewHostAccess covers both the
// native suite's "prevents access from webview" column and the webview
// suite's "prevents access from hosting app" column.
enum class CheckId {
    InteractionRequired,
    DomainMapping,
    HttpsDowngrade,
    BadCert,
    ActionStatic,
    ActionDynamic,
    MethodGet,
    CrossOriginIframe,
    FillOnTransmission,
    AppToDomain,
    DomainToApp,
    OtherAppAccess,
    WebViewHostAccess,
};

std::string to_string(CheckId id);
std::optional<CheckId> parse_check_id(std::string_view text);

enum class Verdict { Secure, Partial, Insecure, Delegated, NotApplicable };

std::string to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

// Legend glyphs used by the markdown renderer.
std::string verdict_glyph(Verdict v);

}  // namespace autofill_sim
