#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autofill_sim/frameworks.hpp"

namespace autofill_sim {

// A password manager described as data: which frameworks it ships on and how
// it behaves where a framework delegates decisions to the manager.
struct ManagerPreset {
    std::string id;
    std::string name;
    std::vector<PolicyId> frameworks;
    std::optional<ManagerProfile> ios_extensions;  // behavior on ios-extensions
    std::optional<ManagerProfile> android;         // behavior on android-autofill-service
};

const std::vector<ManagerPreset>& manager_presets();
const ManagerPreset* find_manager(const std::string& id);

bool manager_supports(const ManagerPreset& preset, PolicyId policy);

// Profile to apply when running `policy` with this manager; frameworks that
// leave no decisions to the manager yield nullopt.
std::optional<ManagerProfile> profile_for(const ManagerPreset& preset, PolicyId policy);

// The preset catalog embedded at build time, byte-identical to the shipped
// data file (a test keeps the two in sync).
const std::string& managers_json_text();

}  // namespace autofill_sim
