#pragma once

#include "rubricforge/llm/types.hpp"
#include "rubricforge/rubric/rubric.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rubricforge::llm {

struct OutcomeDefinition {
    std::string label;
    std::string description;
};

// The three outcome measures given to discovery agents.
std::vector<OutcomeDefinition> default_outcome_definitions();

// Discovery prompt: outcome definitions and BARS instruction in the system
// message; the examples (one per "- " line, internal newlines collapsed) and
// the pipe-delimited output format in the user message.
std::vector<ChatMessage> render_discovery_prompt(const std::vector<OutcomeDefinition>& outcomes,
                                                 const std::vector<std::string>& examples);

// Consolidation prompt listing each member as Name: "...", Definition: "..."
// with quotes and backslashes escaped.
std::vector<ChatMessage> render_consolidation_prompt(
    const std::vector<std::pair<std::string, std::string>>& members);

// Anchor prompt for a consolidated criterion; asks for one row in the
// discovery format so parse_criteria_rows reads the answer.
std::vector<ChatMessage> render_anchor_prompt(const std::string& name, const std::string& definition,
                                              const std::vector<CandidateCriterion>& members);

// Scoring prompt: Q1..Qn with definitions and anchors, user message
// FEEDBACK: "<escaped text>".
std::vector<ChatMessage> render_scoring_prompt(const Rubric& rubric, const std::string& feedback_text);

// Extra user message appended when a scoring reply could not be parsed.
ChatMessage scoring_format_reminder(std::size_t n_dimensions);

// Backslash-escape quotes, backslashes and control characters.
std::string escape_quoted(std::string_view s);
std::string unescape_quoted(std::string_view s);

enum class PromptKind { Discovery, Consolidation, Anchor, Scoring, Unknown };

PromptKind classify_prompt(const std::vector<ChatMessage>& messages);

} // namespace rubricforge::llm
