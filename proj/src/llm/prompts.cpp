#include "rubricforge/llm/prompts.hpp"

#include "rubricforge/util/io.hpp"

#include <stdexcept>

namespace rubricforge::llm {

namespace {

constexpr const char* kDiscoveryOpening =
    "You are working in the context of verbal feedback delivered by a trainer to a trainee in a live surgery.";
constexpr const char* kConsolidationOpening = "You are given a set of similar scoring criteria, each with a name and definition.";
constexpr const char* kAnchorOpening = "You are given one consolidated scoring criterion for verbal feedback delivered by a trainer to a trainee in a live surgery.";
constexpr const char* kScoringOpening = "This is verbal FEEDBACK delivered during surgery by a trainer to a trainee.";
constexpr const char* kRowFormat = "No|Dimension Name|Scoring Definition|Score 1 rating|Score 3 rating|Score 5 rating";

std::string one_line(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == '\n' || c == '\r' || c == '\t') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return trim(out);
}

std::string dq(std::string_view s) { return "\"" + escape_quoted(s) + "\""; }

} // namespace

std::vector<OutcomeDefinition> default_outcome_definitions() {
    return {
        {"Trainee Behavior Change",
         "behavioral adjustment made by the trainee that corresponds directly with the preceding feedback (e.g. "
         "trainee immediately pulls more tightly on the suture thread after receiving feedback to cinch tightly)"},
        {"Trainee Verbal Acknowledgment",
         "verbal or audible confirmation by the trainee confirming that they have heard the feedback (e.g. "
         "“Okay, I see”, “uh-huh, got it.”)"},
        {"Trainer Approval",
         "trainer verbally demonstrates that they are satisfied with the trainee behavioral change (e.g. "
         "“yes”, “mhm”)"},
    };
}

std::string escape_quoted(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out;
}

std::string unescape_quoted(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        const char n = s[++i];
        switch (n) {
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        default: out += n;
        }
    }
    return out;
}

std::vector<ChatMessage> render_discovery_prompt(const std::vector<OutcomeDefinition>& outcomes,
                                                 const std::vector<std::string>& examples) {
    if (examples.empty()) throw std::invalid_argument("render_discovery_prompt: no examples");
    if (outcomes.empty()) throw std::invalid_argument("render_discovery_prompt: no outcome definitions");
    std::string sys;
    sys += kDiscoveryOpening;
    sys += "\nThe goal of the feedback is to modify trainee thinking or behavior.\n";
    sys += "There are different measures assessing feedback effectiveness, including:\n";
    for (const auto& o : outcomes) sys += "- " + o.label + " — " + o.description + ";\n";
    sys += "\nBased on these descriptions, propose dimensions that would be predictive of the ";
    sys += outcomes.size() == 3 ? std::string("three") : std::to_string(outcomes.size());
    sys += " outcomes above.\n";
    sys += "For each dimension, supply a definition such that a rater could score a feedback instance on the "
           "Behaviorally Anchored Rating Scale (BARS) using 5 behavioral anchor levels, from\n"
           "1 = feedback does not exhibit this quality to\n"
           "5 = feedback clearly possesses this quality.\n"
           "Dimensions must be applicable to transcribed feedback lines alone—without preceding dialogue, "
           "video, or timing information.";

    std::string user = "Feedback examples:\n";
    for (const auto& e : examples) user += "- " + one_line(e) + "\n";
    user += "\nProduce an output in the format:\n";
    user += kRowFormat;
    user += "\nDo not include this header in your reply.";
    return {{Role::System, sys}, {Role::User, user}};
}

std::vector<ChatMessage> render_consolidation_prompt(const std::vector<std::pair<std::string, std::string>>& members) {
    if (members.empty()) throw std::invalid_argument("render_consolidation_prompt: no members");
    std::string sys = kConsolidationOpening;
    sys += "\nCombine them under one unified name and definition.\n"
           "Consolidate into exactly one refined criterion based on the list below:\n\n";
    for (const auto& [name, def] : members) sys += "Name: " + dq(name) + ", Definition: " + dq(def) + "\n";
    std::string user = "Based on the consolidated and refined criterion, output a Python tuple in the form:\n"
                       "(No, \"Consolidated Name\", \"Consolidated Definition\")\n"
                       "Only return the tuple—no additional commentary.";
    return {{Role::System, sys}, {Role::User, user}};
}

std::vector<ChatMessage> render_anchor_prompt(const std::string& name, const std::string& definition,
                                              const std::vector<CandidateCriterion>& members) {
    if (members.empty()) throw std::invalid_argument("render_anchor_prompt: no members");
    std::string sys = kAnchorOpening;
    sys += "\nName: " + dq(name) + ", Definition: " + dq(definition) + "\n";
    sys += "It is scored on the Behaviorally Anchored Rating Scale (BARS) from 1 = feedback does not exhibit this "
           "quality to 5 = feedback clearly possesses this quality.\n"
           "Write behavioral anchors for scores 1, 3 and 5 that apply to a single transcribed feedback line. "
           "The source criteria and their anchors were:\n";
    for (const auto& m : members) {
        sys += "Member: " + dq(m.name) + ", Score 1: " + dq(m.anchors[0]) + ", Score 3: " +
               dq(m.anchors[1]) + ", Score 5: " + dq(m.anchors[2]) + "\n";
    }
    std::string user = "Produce exactly one row in the format:\n";
    user += kRowFormat;
    user += "\nDo not include this header in your reply.";
    return {{Role::System, sys}, {Role::User, user}};
}

std::vector<ChatMessage> render_scoring_prompt(const Rubric& rubric, const std::string& feedback_text) {
    if (rubric.dimensions.empty()) throw std::invalid_argument("render_scoring_prompt: empty rubric");
    if (trim(feedback_text).empty()) throw std::invalid_argument("render_scoring_prompt: empty feedback text");
    std::string sys = kScoringOpening;
    sys += "\nPlease rate it given each of the following criteria and associated scales.\n\n";
    for (std::size_t i = 0; i < rubric.dimensions.size(); ++i) {
        const auto& d = rubric.dimensions[i];
        sys += "Q" + std::to_string(i + 1) + ". " + one_line(d.name) + ": " + one_line(d.definition);
        for (std::size_t a = 0; a < 3; ++a) {
            const auto& an = d.anchors[a];
            sys += " Score " + std::to_string(kAnchorLevels[a]) + ": " + one_line(an.description);
            std::vector<std::string> ex = an.examples;
            ex.insert(ex.end(), an.calibration_examples.begin(), an.calibration_examples.end());
            if (!ex.empty()) {
                sys += " (examples:";
                for (std::size_t k = 0; k < ex.size(); ++k) sys += (k ? "; " : " ") + dq(one_line(ex[k]));
                sys += ")";
            }
            sys += ".";
        }
        sys += "\n";
    }
    sys += "\nMake the scoring concise as it needs to be parsed automatically later on; use the format of an ordered "
           "Python list, don't repeat question numbers:\n";
    for (std::size_t i = 0; i < rubric.dimensions.size(); ++i)
        sys += (i ? ", Q" : "Q") + std::to_string(i + 1) + " score";
    const std::string user = "FEEDBACK: " + dq(feedback_text);
    return {{Role::System, sys}, {Role::User, user}};
}

ChatMessage scoring_format_reminder(std::size_t n_dimensions) {
    return {Role::User, "Your previous reply could not be parsed. Reply with exactly " + std::to_string(n_dimensions) +
                            " integers from 1 to 5, comma-separated, in question order, and nothing else."};
}

PromptKind classify_prompt(const std::vector<ChatMessage>& messages) {
    if (messages.empty() || messages.front().role != Role::System) return PromptKind::Unknown;
    const std::string& sys = messages.front().content;
    auto starts = [&](const char* p) { return sys.rfind(p, 0) == 0; };
    if (starts(kDiscoveryOpening)) return PromptKind::Discovery;
    if (starts(kConsolidationOpening)) return PromptKind::Consolidation;
    if (starts(kAnchorOpening)) return PromptKind::Anchor;
    if (starts(kScoringOpening)) return PromptKind::Scoring;
    return PromptKind::Unknown;
}

} // namespace rubricforge::llm
