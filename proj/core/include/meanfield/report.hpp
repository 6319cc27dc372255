#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "meanfield/experiments.hpp"
#include "meanfield/simulator.hpp"
#include "meanfield/systemic_risk.hpp"
#include "meanfield/value_synthesis.hpp"

namespace meanfield {

using Json = nlohmann::json;

/// Deterministic text form: keys sorted, two-space indent, floating-point
/// numbers printed with 17 significant digits. Non-finite numbers are
/// rejected.
std::string canonical_json(const Json& doc);

/// Writes canonical_json(doc) plus a trailing newline. Throws
/// std::runtime_error naming the path on IO failure.
void emit_report(const Json& doc, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

Json to_json(const ResidualReport& report);
Json to_json(const CostReport& report, bool include_paths = false);
Json to_json(const PairedReport& report);
Json to_json(const GapReport& report);
Json to_json(const ScalingReport& report);
Json to_json(const ConsistencyReport& report);
Json to_json(const sr::ConvergenceReport& report);

/// N,eps_hat,stderr rows.
std::string scaling_csv(const ScalingReport& report);
/// N,e1,e2 rows.
std::string convergence_csv(const sr::ConvergenceReport& report);
/// t,pi1,pi2,Pd,P,Lambda,H,r rows.
std::string sr_solution_csv(const sr::SrDirectSolution& direct, const sr::SrMasterSolution& master);

}  // namespace meanfield
