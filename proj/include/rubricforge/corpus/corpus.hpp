#pragma once

#include "rubricforge/util/csv.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rubricforge {

enum class Outcome { BehaviorAdjustment = 0, VerbalAcknowledgment = 1, TrainerApproval = 2, TrainerDisapproval = 3 };

inline constexpr std::array<Outcome, 4> kOutcomes{Outcome::BehaviorAdjustment, Outcome::VerbalAcknowledgment,
                                                   Outcome::TrainerApproval, Outcome::TrainerDisapproval};

// Field name used in corpus files, e.g. "behavior_adjustment".
const char* outcome_key(Outcome o);
// Short display label, e.g. "Behavioral Adj.".
const char* outcome_label(Outcome o);
std::optional<Outcome> outcome_from_key(std::string_view key);

struct OutcomeLabels {
    std::array<int, 4> values{};  // indexed by Outcome

    int operator[](Outcome o) const { return values[static_cast<std::size_t>(o)]; }
    int& operator[](Outcome o) { return values[static_cast<std::size_t>(o)]; }
    bool operator==(const OutcomeLabels&) const = default;
};

struct FeedbackInstance {
    std::string id;
    std::string case_id;
    std::string text;
    std::optional<OutcomeLabels> outcomes;
    std::map<std::string, double> external_features;  // empty when absent

    bool operator==(const FeedbackInstance&) const = default;
};

struct Corpus {
    std::vector<FeedbackInstance> instances;
    std::string provenance;

    std::size_t size() const { return instances.size(); }
    // Row index of an id, or nullopt.
    std::optional<std::size_t> index_of(const std::string& id) const;
    // True when every instance carries outcome labels.
    bool has_outcomes() const;
    // Labels for one outcome; throws DataError if any instance lacks them.
    std::vector<int> labels(Outcome o) const;
    // Sorted feature names shared by instances that carry external features.
    std::vector<std::string> feature_names() const;
};

enum class CorpusFormat { Jsonl, Csv };

// Format from the extension (.csv means CSV, anything else JSONL).
CorpusFormat corpus_format_for(const std::filesystem::path& path);

// Loads and validates. JSONL rows are objects with id, case_id, text and
// optional "outcomes" and "external_features" objects. CSV requires the
// header id,case_id,text,behavior_adjustment,verbal_acknowledgment,
// trainer_approval,trainer_disapproval; any further columns are external
// features. Errors carry the 1-based row (line) number.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus_jsonl(std::string_view text, const std::string& provenance = {});
Corpus parse_corpus_csv(std::string_view text, const std::string& provenance = {});

// Checks the corpus invariants; throws DataError on the first violation.
void validate_corpus(const Corpus& corpus);

// Canonical JSONL (fixed key order, outcomes in declaration order, features
// sorted by name).
std::string format_corpus_jsonl(const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::string corpus_digest(const Corpus& corpus);

struct SummaryRow {
    std::string category;
    std::string dimension;
    std::size_t count = 0;
    double frequency = 0.0;  // count / total instances
    double per_case_mean = 0.0;
    double per_case_sd = 0.0;
    double words_mean = 0.0;  // over the instances counted in this row
    double words_sd = 0.0;
};

std::vector<SummaryRow> summarize_corpus(const Corpus& corpus);
CsvTable summary_table(const std::vector<SummaryRow>& rows);
std::size_t word_count(std::string_view text);

// One id list per agent; agent a (1-based) draws from its own stream so the
// subsets do not depend on n_agents. Ids within a subset keep corpus order.
std::vector<std::vector<std::string>> sample_discovery_subsets(const Corpus& corpus, int n_agents,
                                                               std::size_t subset_size, std::uint64_t seed);

} // namespace rubricforge
