#include "rubricforge/llm/mock.hpp"

#include "rubricforge/corpus/synthetic.hpp"
#include "rubricforge/llm/parsers.hpp"
#include "rubricforge/llm/prompts.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace rubricforge::llm {

namespace {

struct Variant {
    const char* name;
    const char* definition;
};

struct Concept {
    std::vector<Variant> variants;
    std::vector<const char*> keywords;
    const char* anchors[3];
};

const std::vector<Concept>& concepts() {
    static const std::vector<Concept> pool{
        {{{"Encouragement", "Degree to which the feedback conveys support and confidence in the trainee"},
          {"Supportive Tone", "How supportive and positive the wording of the feedback is"},
          {"Positive Reinforcement", "Extent to which the feedback affirms what the trainee did well"}},
         {"encourag", "supportive", "positive reinforcement", "affirm"},
         {"Critical or dismissive tone", "Neutral tone without affirmation", "Explicit praise and confidence"}},
        {{{"Urgency", "How strongly the feedback signals that action is needed immediately"},
          {"Immediacy of Action", "Whether the feedback demands an immediate response"},
          {"Criticality Signal", "How clearly the feedback marks the moment as critical"}},
         {"urgen", "immediacy", "criticality"},
         {"No time pressure conveyed", "Moderate prompting to act soon", "Demands immediate action"}},
        {{{"Actionability", "Extent to which the feedback tells the trainee what to do"},
          {"Specific Instruction", "How specific the instructed action is"},
          {"Concrete Guidance", "Whether the feedback gives concrete, executable guidance"}},
         {"actionab", "specific instruction", "concrete guidance"},
         {"No actionable content", "General direction without specifics", "Precise executable instruction"}},
        {{{"Timeliness", "How closely the feedback relates to the action in progress"},
          {"Real-Time Relevance", "Whether the feedback addresses what is happening right now"},
          {"Promptness", "How soon after the action the feedback is delivered"}},
         {"timel", "real-time", "promptness"},
         {"Refers to a distant past event", "Refers to a recent action", "Addresses the action as it happens"}},
        {{{"Clarity", "How easy the feedback is to understand without context"},
          {"Unambiguous Wording", "Degree to which the wording admits one interpretation"},
          {"Comprehensibility", "How readily a trainee could understand the message"}},
         {"clarity", "unambiguous", "comprehensib"},
         {"Vague or confusing", "Understandable with some effort", "Crystal clear and direct"}},
        {{{"Reflection", "Extent to which the feedback prompts the trainee to think"},
          {"Prompts Thinking", "Whether the feedback asks the trainee to reason about their actions"},
          {"Self-Assessment Cue", "How much the feedback invites the trainee to evaluate their own work"}},
         {"reflect", "prompts thinking", "self-assessment"},
         {"Pure directive with no reasoning", "Mentions a principle", "Asks the trainee to reason or reflect"}},
    };
    return pool;
}

std::string sanitize_cell(std::string s) {
    std::replace(s.begin(), s.end(), '|', '/');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

int shift_reflect(int v, Rng& rng) {
    const int step = rng.bernoulli(0.5) ? 1 : -1;
    int out = v + step;
    if (out < 1) out = 2;
    if (out > 5) out = 4;
    return out;
}

std::string feedback_text_of(const std::vector<ChatMessage>& messages) {
    for (const auto& m : messages) {
        if (m.role != Role::User) continue;
        const auto pos = m.content.find("FEEDBACK: \"");
        if (pos == std::string::npos) continue;
        const auto begin = pos + 11;
        const auto end = m.content.rfind('"');
        if (end == std::string::npos || end < begin) return {};
        return unescape_quoted(std::string_view(m.content).substr(begin, end - begin));
    }
    return {};
}

} // namespace

int mock_concept_of(std::string_view criterion_name) {
    const std::string lower = to_lower(criterion_name);
    const auto& pool = concepts();
    for (std::size_t c = 0; c < pool.size(); ++c)
        for (const char* k : pool[c].keywords)
            if (lower.find(k) != std::string::npos) return static_cast<int>(c);
    return -1;
}

MockCompletionBackend::MockCompletionBackend(MockOptions options, std::map<std::string, std::string> scenario)
    : options_(std::move(options)), scenario_(std::move(scenario)) {
    nlohmann::ordered_json j{{"seed", options_.seed},
                             {"candidate_noise", options_.candidate_noise},
                             {"noise_tag", options_.noise_tag},
                             {"noise_rate", options_.noise_rate},
                             {"max_extra_criteria", options_.max_extra_criteria},
                             {"scenario", scenario_}};
    id_ = "mock-" + sha256_hex(j.dump()).substr(0, 12);
}

std::map<std::string, std::string> MockCompletionBackend::load_scenario(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mock scenario " + path.string() + ": " + e.what());
    }
    return out;
}

CompletionResponse MockCompletionBackend::complete(const CompletionRequest& request) {
    const std::size_t n = ++calls_;
    if (options_.fail_after && n > *options_.fail_after) throw BackendError("mock backend: simulated interruption");
    CompletionResponse r;
    r.backend_id = id();
    const auto fp = prompt_fingerprint(request.messages);
    if (auto it = scenario_.find(fp); it != scenario_.end()) r.text = it->second;
    else r.text = synthesize(request);
    return r;
}

std::string MockCompletionBackend::synthesize(const CompletionRequest& request) const {
    const auto& messages = request.messages;
    const auto fp = prompt_fingerprint(messages);
    const std::string& sys = messages.front().content;
    switch (classify_prompt(messages)) {
    case PromptKind::Discovery: {
        Rng rng(options_.seed ^ sha256_u64(fp), "mock-discovery");
        const auto& pool = concepts();
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        const auto extra = rng.uniform_int(0, std::max(0, options_.max_extra_criteria));
        for (std::int64_t e = 0; e < extra; ++e)
            order.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size() - 1))));
        std::string out;
        int ordinal = 0;
        for (auto c : order) {
            const auto& con = pool[c];
            const auto& v = con.variants[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(con.variants.size() - 1)))];
            out += std::to_string(++ordinal) + "|" + v.name + "|" + v.definition + "|" + con.anchors[0] + "|" +
                   con.anchors[1] + "|" + con.anchors[2] + "\n";
        }
        return out;
    }
    case PromptKind::Consolidation: {
        for (const auto& line : split(sys, '\n')) {
            if (line.rfind("Name: ", 0) != 0) continue;
            const auto q = extract_quoted_strings(line);
            if (q.size() >= 2) return "(1, \"" + escape_quoted(q[0]) + "\", \"" + escape_quoted(q[1]) + "\")";
        }
        return "(1, \"Unnamed\", \"No definition\")";
    }
    case PromptKind::Anchor: {
        std::string name = "Unnamed", definition = "No definition";
        std::vector<std::string> anchors{"Absent", "Partly present", "Clearly present"};
        bool have_member = false;
        for (const auto& line : split(sys, '\n')) {
            const auto q = extract_quoted_strings(line);
            if (line.rfind("Name: ", 0) == 0 && q.size() >= 2) {
                name = q[0];
                definition = q[1];
            } else if (!have_member && line.rfind("Member: ", 0) == 0 && q.size() >= 4) {
                anchors.assign(q.begin() + 1, q.begin() + 4);
                have_member = true;
            }
        }
        return "1|" + sanitize_cell(name) + "|" + sanitize_cell(definition) + "|" + sanitize_cell(anchors[0]) + "|" +
               sanitize_cell(anchors[1]) + "|" + sanitize_cell(anchors[2]);
    }
    case PromptKind::Scoring: {
        const std::string text = feedback_text_of(messages);
        std::vector<int> scores;
        std::size_t q_index = 0;
        for (const auto& line : split(sys, '\n')) {
            if (line.size() < 3 || line[0] != 'Q' || !std::isdigit(static_cast<unsigned char>(line[1]))) continue;
            const auto dot = line.find(". ");
            if (dot == std::string::npos) continue;
            const auto colon = line.find(": ", dot + 2);
            const std::string name = line.substr(dot + 2, colon == std::string::npos ? std::string::npos : colon - dot - 2);
            const int concept_id = mock_concept_of(name);
            int level = 0;
            if (concept_id >= 0) level = detect_cue_level(text, static_cast<std::size_t>(concept_id));
            if (level == 0) {
                Rng rng(options_.seed ^ sha256_u64(name + "\x1f" + text), "mock-unknown");
                level = concept_id >= 0 ? 3 : static_cast<int>(rng.uniform_int(1, 5));
            }
            Rng noise(options_.seed ^ sha256_u64(name + "\x1f" + text), "mock-candidate-noise");
            if (noise.bernoulli(options_.candidate_noise)) level = shift_reflect(level, noise);
            if (!options_.noise_tag.empty() && request.replicate_tag == options_.noise_tag) {
                Rng tag_noise(options_.seed ^ sha256_u64(name + "\x1f" + text + "\x1f" + request.replicate_tag),
                              "mock-tag-noise", q_index);
                if (tag_noise.bernoulli(options_.noise_rate)) level = shift_reflect(level, tag_noise);
            }
            scores.push_back(level);
            ++q_index;
        }
        std::string out;
        for (std::size_t i = 0; i < scores.size(); ++i) out += (i ? ", " : "") + std::to_string(scores[i]);
        return out;
    }
    case PromptKind::Unknown:
        break;
    }
    return "mock backend: unrecognized prompt";
}

std::vector<std::vector<double>> HashEmbeddingBackend::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        Rng rng(sha256_u64(t), "hash-embedding");
        std::vector<double> v(dimension_);
        double norm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (auto& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace rubricforge::llm
