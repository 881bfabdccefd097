#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autofill_sim/attacks.hpp"
#include "autofill_sim/checks.hpp"
#include "autofill_sim/frameworks.hpp"

namespace autofill_sim {

enum class Suite { Browser, Native, WebView };

std::string to_string(Suite s);
std::optional<Suite> parse_suite(std::string_view text);
const std::vector<Suite>& all_suites();

// Column order of each suite's conformance row.
const std::vector<CheckId>& suite_checks(Suite s);

// True when the framework leaves this check's behavior to the manager; runs
// without a manager profile report such cells as Delegated.
bool check_delegated(Suite s, CheckId check, PolicyId policy);

struct ConformanceCell {
    CheckId check;
    Verdict verdict;

    bool operator==(const ConformanceCell&) const = default;
};

struct ConformanceReport {
    Suite suite = Suite::Browser;
    PolicyId policy = PolicyId::IosPasswordAutofill;
    std::optional<std::string> manager_id;
    std::vector<ConformanceCell> cells;  // in suite column order
};

enum class ReportFormat { Json, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view text);

// $AUTOFILL_SIM_FIXTURES, or "fixtures" when unset.
std::string default_scene_dir();

// Runs one suite against fixture scenes laid out as
// <scene_dir>/<suite>/<check-id>.scene.json.
ConformanceReport run_suite(Suite suite, PolicyId policy,
                            const std::optional<ManagerProfile>& manager,
                            const std::string& scene_dir);

struct GoldenDiff {
    CheckId check;
    Verdict expected;
    Verdict actual;
};

std::vector<GoldenDiff> compare_golden(const ConformanceReport& report,
                                       const std::string& golden_path);

std::string render_report(const ConformanceReport& report, ReportFormat format);
ConformanceReport report_from_json(const std::string& text);

// All suites x all frameworks, framework-level (no manager profiles).
std::vector<ConformanceReport> run_matrix(const std::string& scene_dir);
std::string render_matrix(const std::vector<ConformanceReport>& reports, ReportFormat format);

struct AttackMatrixRow {
    AttackKind attack;
    PolicyId policy;
    AttackOutcome outcome;
};

// Every attack kind against every framework with an approving user.
std::vector<AttackMatrixRow> run_attack_matrix();
std::string render_attack_matrix(const std::vector<AttackMatrixRow>& rows, ReportFormat format);

// Conformance matrix plus attack matrix in one deterministic rendering.
std::string render_full_matrix(const std::string& scene_dir, ReportFormat format);

// Canonical fixture scenes: relative path -> file content.
std::map<std::string, std::string> fixture_files();
void write_fixtures(const std::string& dir);

}  // namespace autofill_sim
