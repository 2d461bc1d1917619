#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace callsum {

struct LikertResponse {
    std::string participant_id;
    std::string experiment_id;
    std::string method_id;
    std::string source_label;
    int rating = 0;  // 1..4
};

struct PreferenceResponse {
    std::string participant_id;
    std::string experiment_id;
    std::string method_id;
    std::string chosen_source;
    std::string alternative_source;
};

struct ParticipantRecord {
    std::string participant_id;
    int qc_correct = 0;  // out of 3
};

inline constexpr int kQcQuestions = 3;

struct QcResult {
    std::vector<LikertResponse> likert;
    std::vector<PreferenceResponse> prefs;
    std::vector<std::string> removed_participants;
    std::size_t retained_participants = 0;  // participants with at least one retained response
    std::size_t likert_removed = 0;
    std::size_t prefs_removed = 0;
};

/// Drops every response from participants who missed any quality-control
/// question. Throws ConfigError for responses from unknown participants.
QcResult qc_filter(const std::vector<LikertResponse>& likert, const std::vector<PreferenceResponse>& prefs,
                   const std::vector<ParticipantRecord>& participants);

enum class MwMethod { exact, normal_approx };

struct MannWhitneyResult {
    double u = 0;  // for the first sample
    double p_two_sided = 1;
    MwMethod method = MwMethod::exact;
};

/// Largest combined sample size handled by full enumeration.
inline constexpr std::size_t kExactLimit = 12;

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct SourceSummary {
    std::string label;
    double likert_mean = 0;
    std::size_t likert_n = 0;
    std::size_t preference_count = 0;
};

struct ExperimentReport {
    std::string experiment_id;
    std::vector<SourceSummary> sources;  // two entries, label order
    std::optional<MannWhitneyResult> test;
    double alpha = 0.05;
    bool significant = false;
    std::size_t total_preferences = 0;
    std::string winner;  // a source label, or "tie"
};

inline constexpr const char* kTie = "tie";

ExperimentReport analyze_experiment(const std::vector<LikertResponse>& likert,
                                    const std::vector<PreferenceResponse>& prefs, double alpha = 0.05);

/// Groups by experiment_id (sorted) and analyzes each group.
std::vector<ExperimentReport> analyze_all(const std::vector<LikertResponse>& likert,
                                          const std::vector<PreferenceResponse>& prefs, double alpha = 0.05);

/// One bracket row: two entrants, each a source label or "best-of-<experiment_id>".
struct Pairing {
    std::string experiment_id;
    std::string left;
    std::string right;
};

/// Renders the bracket with winners propagated, one line per experiment.
std::string tournament_report(const std::vector<ExperimentReport>& reports, const std::vector<Pairing>& pairings);

nlohmann::ordered_json to_json(const ExperimentReport& r);
nlohmann::ordered_json to_json(const QcResult& r);

std::vector<LikertResponse> load_likert(const std::filesystem::path& path);
std::vector<PreferenceResponse> load_preferences(const std::filesystem::path& path);
std::vector<ParticipantRecord> load_participants(const std::filesystem::path& path);
std::vector<Pairing> load_pairings(const std::filesystem::path& path);

}  // namespace callsum
