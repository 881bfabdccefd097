#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "autofill_sim/attacks.hpp"
#include "autofill_sim/errors.hpp"
#include "autofill_sim/harness.hpp"
#include "autofill_sim/managers.hpp"

namespace {

using namespace autofill_sim;
using nlohmann::json;

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

struct ManagerChoice {
    std::optional<std::string> id;           // validated preset id, when given
    std::optional<ManagerProfile> profile;   // profile applied to the run
};

// Validates --manager against the preset catalog. `ok` is false when the
// name is unknown or the manager does not ship on the framework.
ManagerChoice resolve_manager(const std::string& manager_id, PolicyId policy, bool& ok,
                              std::string& problem) {
    ok = true;
    if (manager_id.empty()) return {};
    const ManagerPreset* preset = find_manager(manager_id);
    if (!preset) {
        ok = false;
        problem = "unknown manager \"" + manager_id + "\"";
        return {};
    }
    if (!manager_supports(*preset, policy)) {
        ok = false;
        problem = "manager \"" + manager_id + "\" does not ship on " + to_string(policy);
        return {};
    }
    return {preset->id, profile_for(*preset, policy)};
}

int do_run(const std::string& suite_s, const std::string& framework_s,
           const std::string& manager_s, const std::string& report_s,
           const std::string& golden_path, const std::string& fixtures_dir) {
    auto suite = parse_suite(suite_s);
    if (!suite) return usage_error("unknown suite \"" + suite_s + "\"");
    auto policy = parse_policy_id(framework_s);
    if (!policy) return usage_error("unknown framework \"" + framework_s + "\"");
    auto format = parse_report_format(report_s);
    if (!format) return usage_error("unknown report format \"" + report_s + "\"");
    bool ok = true;
    std::string problem;
    ManagerChoice manager = resolve_manager(manager_s, *policy, ok, problem);
    if (!ok) return usage_error(problem);

    const std::string dir = fixtures_dir.empty() ? default_scene_dir() : fixtures_dir;
    ConformanceReport report = run_suite(*suite, *policy, manager.profile, dir);
    if (manager.id) report.manager_id = manager.id;
    std::cout << render_report(report, *format);

    if (golden_path.empty()) return 0;
    std::vector<GoldenDiff> diffs = compare_golden(report, golden_path);
    if (diffs.empty()) return 0;
    for (const GoldenDiff& d : diffs)
        std::cerr << "diff: " << to_string(d.check) << " expected " << to_string(d.expected)
                  << ", got " << to_string(d.actual) << "\n";
    return 1;
}

int do_attack(const std::string& attack_s, const std::string& framework_s,
              const std::string& manager_s, const std::string& user_s, bool reveal) {
    auto kind = parse_attack_kind(attack_s);
    if (!kind) return usage_error("unknown attack \"" + attack_s + "\"");
    auto policy = parse_policy_id(framework_s);
    if (!policy) return usage_error("unknown framework \"" + framework_s + "\"");
    UserAgent user;
    if (user_s == "approve")
        user = UserAgent::AlwaysApprove;
    else if (user_s == "deny")
        user = UserAgent::AlwaysDeny;
    else
        return usage_error("unknown user \"" + user_s + "\" (approve | deny)");
    bool ok = true;
    std::string problem;
    ManagerChoice manager = resolve_manager(manager_s, *policy, ok, problem);
    if (!ok) return usage_error(problem);

    AttackRun run = run_attack_detailed(*kind, *policy, manager.profile, user);

    json j;
    j["attack"] = to_string(*kind);
    j["framework"] = to_string(*policy);
    if (manager.id) j["manager"] = *manager.id;
    j["user"] = to_string(user);
    j["result"] = to_string(run.outcome.result);
    if (!run.outcome.credential_ids.empty()) j["credentials"] = run.outcome.credential_ids;
    if (!run.outcome.captured_by.empty()) j["captured_by"] = run.outcome.captured_by;
    if (!run.outcome.blocked_reason.empty()) j["blocked_reason"] = run.outcome.blocked_reason;
    if (reveal) {
        // Secret values stay out of every rendering unless explicitly asked for.
        json secrets = json::array();
        for (const std::string& id : run.outcome.credential_ids)
            for (const Credential& c : run.scenario.scene.vault.credentials)
                if (c.id == id)
                    secrets.push_back(json{{"id", c.id},
                                           {"username", c.username},
                                           {"password", c.password.reveal()}});
        j["secrets"] = std::move(secrets);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int do_matrix(const std::string& report_s, const std::string& fixtures_dir) {
    auto format = parse_report_format(report_s);
    if (!format) return usage_error("unknown report format \"" + report_s + "\"");
    const std::string dir = fixtures_dir.empty() ? default_scene_dir() : fixtures_dir;
    std::cout << render_full_matrix(dir, *format);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator of the mobile password-autofill ecosystem"};
    app.require_subcommand(1);

    std::string suite_s, framework_s, manager_s, golden_path, fixtures_dir, attack_s;
    std::string report_s = "markdown";
    std::string user_s = "approve";
    std::string out_dir = "fixtures";
    bool reveal = false;

    CLI::App* run_cmd = app.add_subcommand("run", "Run one conformance suite");
    run_cmd->add_option("--suite", suite_s, "browser | native | webview")->required();
    run_cmd->add_option("--framework", framework_s,
                        "ios-extensions | ios-password-autofill | android-autofill-service | "
                        "secure-model")
        ->required();
    run_cmd->add_option("--manager", manager_s, "manager preset id");
    run_cmd->add_option("--report", report_s, "json | markdown (default markdown)");
    run_cmd->add_option("--golden", golden_path, "expected report to compare against");
    run_cmd->add_option("--fixtures", fixtures_dir,
                        "fixture directory (default $AUTOFILL_SIM_FIXTURES or ./fixtures)");

    CLI::App* attack_cmd = app.add_subcommand("attack", "Run one attack scenario");
    attack_cmd->add_option("--attack", attack_s, "attack kind")->required();
    attack_cmd->add_option("--framework", framework_s, "framework policy")->required();
    attack_cmd->add_option("--manager", manager_s, "manager preset id");
    attack_cmd->add_option("--user", user_s, "approve | deny (default approve)");
    attack_cmd->add_flag("--reveal", reveal, "include stolen secret values in the output");

    CLI::App* matrix_cmd =
        app.add_subcommand("matrix", "Full conformance matrix plus attack matrix");
    matrix_cmd->add_option("--report", report_s, "json | markdown (default markdown)");
    matrix_cmd->add_option("--fixtures", fixtures_dir,
                           "fixture directory (default $AUTOFILL_SIM_FIXTURES or ./fixtures)");

    CLI::App* gen_cmd = app.add_subcommand("gen-fixtures", "Write the canonical fixture scenes");
    gen_cmd->add_option("--out", out_dir, "output directory (default ./fixtures)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd)
            return do_run(suite_s, framework_s, manager_s, report_s, golden_path, fixtures_dir);
        if (*attack_cmd) return do_attack(attack_s, framework_s, manager_s, user_s, reveal);
        if (*matrix_cmd) return do_matrix(report_s, fixtures_dir);
        if (*gen_cmd) {
            write_fixtures(out_dir);
            std::cout << "wrote " << fixture_files().size() << " fixture scenes to " << out_dir
                      << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
