#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autofill_sim/frameworks.hpp"

namespace autofill_sim {

enum class AttackKind {
    CrossOriginIframePhish,
    WebViewMaliciousPage,
    WebViewMaliciousApp,
    NetworkInjectionHttp,
    NetworkInjectionBadCert,
    ActionRewriteStatic,
    ActionRewriteDynamic,
    GetMethodLeak,
    LookAlikeApp,
    SideLoadedImpersonation,
    PackageNameSquatPrefix,
    PackageNameSquatSubstring,
    PackageNameSquatPackageInversion,
};

std::string to_string(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(std::string_view text);
const std::vector<AttackKind>& all_attacks();

// Attacker-controlled package id that the given name-based heuristic maps to
// the victim's domain. Only Prefix, Substring, and PackageInversion are
// squattable; the rest throw UnsquattableSchemeError.
AppIdentity squat_generator(MappingScheme::Kind scheme, const DomainName& victim);

struct AttackScenario {
    Scene scene;
    FillContext ctx;
    DomainName victim;             // whose credential the attacker is after
    Origin attacker_origin;        // where stolen network traffic lands
    std::string attacker_package;  // the attacker's app, when one exists
};

AttackScenario build_scenario(AttackKind kind, const DomainName& victim);

struct AttackOutcome {
    enum class Result { Stolen, UserGatedStolen, UserGatedSafe, Blocked };

    Result result = Result::Blocked;
    std::vector<std::string> credential_ids;  // stolen credentials, sorted
    std::string captured_by;                  // origin or package id
    std::string blocked_reason;               // check id or mapping reason
};

std::string to_string(AttackOutcome::Result r);

struct AttackRun {
    AttackScenario scenario;
    CeremonyResult ceremony;
    // Ceremony exfiltrations plus synthesized observations (referrer leaks).
    std::vector<Exfiltration> observed;
    AttackOutcome outcome;
};

AttackOutcome run_attack(AttackKind kind, PolicyId policy,
                         const std::optional<ManagerProfile>& manager, UserAgent user);
AttackRun run_attack_detailed(AttackKind kind, PolicyId policy,
                              const std::optional<ManagerProfile>& manager, UserAgent user);

}  // namespace autofill_sim
