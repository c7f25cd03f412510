#pragma once

#include "magneto/constraints.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace magneto {

// Key-value configuration files (INI syntax). Cell parameters live under
// [cell], machine parameters under [printer]; missing keys keep their
// defaults, unknown keys are rejected. Pairs are written "x, y" and macros
// use "\n" for line breaks. Throws ConfigError.
CellSpec parse_spec_config(std::string_view text, const CellSpec &base = {});
PrinterProfile parse_profile_config(std::string_view text, const PrinterProfile &base = {});
CellSpec load_spec_config(const std::filesystem::path &path, const CellSpec &base = {});
PrinterProfile load_profile_config(const std::filesystem::path &path, const PrinterProfile &base = {});

std::string to_config(const CellSpec &spec);
std::string to_config(const PrinterProfile &profile);

using Json = nlohmann::ordered_json;

Json to_json(const CellSpec &spec);
Json to_json(const PrinterProfile &profile);
Json to_json(const Violation &v);
Json to_json(const MixtureRecipe &recipe);
CellSpec spec_from_json(const Json &j, const CellSpec &base = {});
PrinterProfile profile_from_json(const Json &j, const PrinterProfile &base = {});
Violation violation_from_json(const Json &j);

// {"valid": bool, "violations": [...]}
Json violation_report(const std::vector<Violation> &violations);
std::vector<Violation> violations_from_report(const Json &report);

// Envelope bounds in the units the UI sliders use, including per-shape
// cross-section ranges derived from the inscribed-diameter bounds.
Json limits_json(const PrinterProfile &profile);

} // namespace magneto
