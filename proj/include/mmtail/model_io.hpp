#pragma once

#include <string>

#include <json.hpp>

#include "mmtail/model.hpp"
#include "mmtail/wealth.hpp"

namespace mmtail {

/// JSON layout: {"states": [{"type": ..., ...}], "generator": [[...]], "phi": [...],
/// "varpi": [...], "jumps": [{"from": i, "to": j, "mgf": {"type": ...}}]} with 0-based indices.
/// Malformed documents raise ValidationError. Omitted jumps are DegenerateZero.
[[nodiscard]] ModelSpec spec_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json spec_to_json(const ModelSpec& spec);

[[nodiscard]] nlohmann::json exponent_to_json(const LevyExponent& e);
[[nodiscard]] nlohmann::json jump_to_json(const JumpMgf& m);

/// {"y": [...], "generator": [[...]], "gamma": g, "rho_tilde": r, "phi": f}
[[nodiscard]] WealthModel wealth_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json wealth_to_json(const WealthModel& model);

[[nodiscard]] nlohmann::json read_json_file(const std::string& path);
[[nodiscard]] ModelSpec load_spec(const std::string& path);
[[nodiscard]] WealthModel load_wealth(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
[[nodiscard]] std::string spec_hash(const ModelSpec& spec);
[[nodiscard]] std::string wealth_hash(const WealthModel& model);

}  // namespace mmtail
