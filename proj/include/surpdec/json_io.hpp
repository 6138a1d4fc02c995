#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "surpdec/types.hpp"

namespace surpdec {

inline constexpr int kCandidateSchemaVersion = 1;
inline constexpr int kStimulusSchemaVersion = 1;
inline constexpr int kResultSchemaVersion = 1;

void to_json(nlohmann::json& j, const Stimulus& s);
void from_json(const nlohmann::json& j, Stimulus& s);
void to_json(nlohmann::json& j, const Candidate& c);
void from_json(const nlohmann::json& j, Candidate& c);
void to_json(nlohmann::json& j, const CandidateSet& s);
void from_json(const nlohmann::json& j, CandidateSet& s);
void to_json(nlohmann::json& j, const DecompositionResult& r);
void from_json(const nlohmann::json& j, DecompositionResult& r);
void to_json(nlohmann::json& j, const PolicyDistribution& d);
void from_json(const nlohmann::json& j, PolicyDistribution& d);
void to_json(nlohmann::json& j, const FrontierPoint& p);
void from_json(const nlohmann::json& j, FrontierPoint& p);

/// {"schema_version": 1, "candidate_sets": [...]} with deterministic key order.
std::string candidate_sets_to_json(const std::vector<CandidateSet>& sets);
/// Each set is re-validated on load.
std::vector<CandidateSet> candidate_sets_from_json(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace surpdec
