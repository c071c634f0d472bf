#include "rubricforge/corpus/corpus.hpp"

#include "rubricforge/stats/ranks.hpp"
#include "rubricforge/util/errors.hpp"
#include "rubricforge/util/hash.hpp"
#include "rubricforge/util/io.hpp"
#include "rubricforge/util/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

namespace rubricforge {

using nlohmann::json;
using nlohmann::ordered_json;

const char* outcome_key(Outcome o) {
    switch (o) {
    case Outcome::BehaviorAdjustment: return "behavior_adjustment";
    case Outcome::VerbalAcknowledgment: return "verbal_acknowledgment";
    case Outcome::TrainerApproval: return "trainer_approval";
    case Outcome::TrainerDisapproval: return "trainer_disapproval";
    }
    return "";
}

const char* outcome_label(Outcome o) {
    switch (o) {
    case Outcome::BehaviorAdjustment: return "Behavioral Adj.";
    case Outcome::VerbalAcknowledgment: return "Verbal Ack.";
    case Outcome::TrainerApproval: return "Approval";
    case Outcome::TrainerDisapproval: return "Disapproval";
    }
    return "";
}

std::optional<Outcome> outcome_from_key(std::string_view key) {
    for (auto o : kOutcomes)
        if (key == outcome_key(o)) return o;
    return std::nullopt;
}

std::optional<std::size_t> Corpus::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (instances[i].id == id) return i;
    return std::nullopt;
}

bool Corpus::has_outcomes() const {
    return !instances.empty() &&
           std::all_of(instances.begin(), instances.end(), [](const auto& f) { return f.outcomes.has_value(); });
}

std::vector<int> Corpus::labels(Outcome o) const {
    std::vector<int> out;
    out.reserve(instances.size());
    for (const auto& f : instances) {
        if (!f.outcomes) throw DataError("instance " + f.id + " has no outcome labels");
        out.push_back((*f.outcomes)[o]);
    }
    return out;
}

std::vector<std::string> Corpus::feature_names() const {
    for (const auto& f : instances) {
        if (f.external_features.empty()) continue;
        std::vector<std::string> names;
        for (const auto& [k, v] : f.external_features) names.push_back(k);
        return names;
    }
    return {};
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
    return to_lower(path.extension().string()) == ".csv" ? CorpusFormat::Csv : CorpusFormat::Jsonl;
}

namespace {

std::string row_ref(std::size_t row) { return "row " + std::to_string(row); }

// Incremental validation shared by both readers.
class CorpusBuilder {
public:
    void add(FeedbackInstance inst, const std::string& where) {
        if (trim(inst.id).empty()) throw DataError(where + ": empty id");
        if (trim(inst.case_id).empty()) throw DataError(where + ": empty case_id");
        if (trim(inst.text).empty()) throw DataError(where + ": empty text for id " + inst.id);
        auto [it, inserted] = seen_.emplace(inst.id, where);
        if (!inserted) throw DataError(where + ": duplicate id \"" + inst.id + "\" (first seen at " + it->second + ")");
        if (!inst.external_features.empty()) {
            std::vector<std::string> names;
            for (const auto& [k, v] : inst.external_features) {
                if (!std::isfinite(v)) throw DataError(where + ": non-finite external feature " + k);
                names.push_back(k);
            }
            if (!feature_names_) {
                feature_names_ = names;
                feature_where_ = where;
            } else if (*feature_names_ != names) {
                throw DataError(where + ": ragged external_features (keys differ from " + feature_where_ + ")");
            }
        }
        corpus_.instances.push_back(std::move(inst));
    }

    Corpus finish(const std::string& provenance) {
        if (corpus_.instances.empty()) throw DataError("corpus is empty");
        corpus_.provenance = provenance;
        return std::move(corpus_);
    }

private:
    Corpus corpus_;
    std::unordered_map<std::string, std::string> seen_;
    std::optional<std::vector<std::string>> feature_names_;
    std::string feature_where_;
};

int parse_binary(const json& v, const std::string& where, const char* key) {
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number_integer() || v.is_number_unsigned()) {
        const auto i = v.get<long long>();
        if (i == 0 || i == 1) return static_cast<int>(i);
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == 0.0 || d == 1.0) return static_cast<int>(d);
    }
    throw DataError(where + ": outcome " + key + " must be 0 or 1");
}

int parse_binary_cell(const std::string& cell, const std::string& where, const char* key) {
    const std::string t = trim(cell);
    if (t == "0" || t == "0.0" || to_lower(t) == "false") return 0;
    if (t == "1" || t == "1.0" || to_lower(t) == "true") return 1;
    throw DataError(where + ": outcome " + key + " must be 0 or 1, got \"" + t + "\"");
}

double parse_double_cell(const std::string& cell, const std::string& where, const std::string& name) {
    const std::string t = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw DataError(where + ": feature " + name + " is not a number: \"" + t + "\"");
    return v;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(where + ": missing field \"" + std::string(key) + "\"");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer() || it->is_number_unsigned()) return it->dump();
    throw DataError(where + ": field \"" + std::string(key) + "\" must be a string");
}

const char* kCsvHeader[] = {"id", "case_id", "text", "behavior_adjustment", "verbal_acknowledgment",
                            "trainer_approval", "trainer_disapproval"};

} // namespace

Corpus parse_corpus_jsonl(std::string_view text, const std::string& provenance) {
    CorpusBuilder builder;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const std::string where = row_ref(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
        FeedbackInstance inst;
        inst.id = string_field(obj, "id", where);
        inst.case_id = string_field(obj, "case_id", where);
        inst.text = string_field(obj, "text", where);
        if (auto it = obj.find("outcomes"); it != obj.end() && !it->is_null()) {
            if (!it->is_object()) throw DataError(where + ": outcomes must be an object");
            OutcomeLabels labels;
            std::size_t present = 0;
            for (auto o : kOutcomes) {
                auto f = it->find(outcome_key(o));
                if (f == it->end() || f->is_null()) continue;
                labels[o] = parse_binary(*f, where, outcome_key(o));
                ++present;
            }
            for (const auto& [k, v] : it->items())
                if (!outcome_from_key(k)) throw DataError(where + ": unknown outcome \"" + k + "\"");
            if (present != 0 && present != kOutcomes.size()) {
                std::string missing;
                for (auto o : kOutcomes) {
                    auto f = it->find(outcome_key(o));
                    if (f == it->end() || f->is_null()) missing += std::string(missing.empty() ? "" : ", ") + outcome_key(o);
                }
                throw DataError(where + ": partial outcomes (missing " + missing + ")");
            }
            if (present) inst.outcomes = labels;
        }
        if (auto it = obj.find("external_features"); it != obj.end() && !it->is_null()) {
            if (!it->is_object()) throw DataError(where + ": external_features must be an object");
            for (const auto& [k, v] : it->items()) {
                if (!v.is_number()) throw DataError(where + ": external feature " + k + " is not a number");
                inst.external_features[k] = v.get<double>();
            }
        }
        builder.add(std::move(inst), where);
        if (end == text.size()) break;
    }
    return builder.finish(provenance);
}

Corpus parse_corpus_csv(std::string_view text, const std::string& provenance) {
    const CsvTable table = parse_csv(text);
    const std::size_t fixed = std::size(kCsvHeader);
    if (table.header.size() < fixed)
        throw DataError("csv corpus: header must start with id,case_id,text,behavior_adjustment,"
                        "verbal_acknowledgment,trainer_approval,trainer_disapproval");
    for (std::size_t i = 0; i < fixed; ++i) {
        if (trim(table.header[i]) != kCsvHeader[i])
            throw DataError("csv corpus: header column " + std::to_string(i + 1) + " must be \"" + kCsvHeader[i] +
                            "\", got \"" + table.header[i] + "\"");
    }
    std::vector<std::string> feature_names;
    for (std::size_t i = fixed; i < table.header.size(); ++i) feature_names.push_back(trim(table.header[i]));

    CorpusBuilder builder;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = row_ref(r + 1) + " (line " + std::to_string(table.line_numbers[r]) + ")";
        if (row.size() != table.header.size())
            throw DataError(where + ": expected " + std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(row.size()));
        FeedbackInstance inst;
        inst.id = trim(row[0]);
        inst.case_id = trim(row[1]);
        inst.text = row[2];
        std::size_t present = 0;
        OutcomeLabels labels;
        for (auto o : kOutcomes) {
            const auto& cell = row[3 + static_cast<std::size_t>(o)];
            if (trim(cell).empty()) continue;
            labels[o] = parse_binary_cell(cell, where, outcome_key(o));
            ++present;
        }
        if (present != 0 && present != kOutcomes.size()) throw DataError(where + ": partial outcomes");
        if (present) inst.outcomes = labels;
        std::size_t fpresent = 0;
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            const auto& cell = row[fixed + j];
            if (trim(cell).empty()) continue;
            inst.external_features[feature_names[j]] = parse_double_cell(cell, where, feature_names[j]);
            ++fpresent;
        }
        if (fpresent != 0 && fpresent != feature_names.size())
            throw DataError(where + ": ragged external_features (some feature cells empty)");
        builder.add(std::move(inst), where);
    }
    return builder.finish(provenance);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    if (!std::filesystem::exists(path)) throw DataError("corpus file not found: " + path.string());
    const std::string text = read_text_file(path);
    try {
        return format == CorpusFormat::Csv ? parse_corpus_csv(text, path.string()) : parse_corpus_jsonl(text, path.string());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

Corpus load_corpus(const std::filesystem::path& path) { return load_corpus(path, corpus_format_for(path)); }

void validate_corpus(const Corpus& corpus) {
    CorpusBuilder builder;
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) builder.add(corpus.instances[i], row_ref(i + 1));
    builder.finish(corpus.provenance);
}

std::string format_corpus_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& f : corpus.instances) {
        ordered_json j;
        j["id"] = f.id;
        j["case_id"] = f.case_id;
        j["text"] = f.text;
        if (f.outcomes) {
            ordered_json o;
            for (auto k : kOutcomes) o[outcome_key(k)] = (*f.outcomes)[k];
            j["outcomes"] = o;
        }
        if (!f.external_features.empty()) {
            ordered_json e;
            for (const auto& [k, v] : f.external_features) e[k] = v;
            j["external_features"] = e;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
    write_text_file_atomic(path, format_corpus_jsonl(corpus));
}

std::string corpus_digest(const Corpus& corpus) { return sha256_hex(format_corpus_jsonl(corpus)); }

std::size_t word_count(std::string_view text) { return split_whitespace(text).size(); }

std::vector<SummaryRow> summarize_corpus(const Corpus& corpus) {
    if (corpus.instances.empty()) throw DataError("summarize_corpus: corpus is empty");
    std::vector<std::string> cases;
    std::unordered_map<std::string, std::size_t> case_index;
    for (const auto& f : corpus.instances) {
        if (case_index.emplace(f.case_id, cases.size()).second) cases.push_back(f.case_id);
    }
    const double total = static_cast<double>(corpus.size());

    auto make_row = [&](const std::string& category, const std::string& dimension, auto&& selected) {
        SummaryRow row;
        row.category = category;
        row.dimension = dimension;
        std::vector<double> per_case(cases.size(), 0.0);
        std::vector<double> words;
        for (const auto& f : corpus.instances) {
            if (!selected(f)) continue;
            ++row.count;
            per_case[case_index.at(f.case_id)] += 1.0;
            words.push_back(static_cast<double>(word_count(f.text)));
        }
        row.frequency = static_cast<double>(row.count) / total;
        row.per_case_mean = stats::mean(per_case);
        row.per_case_sd = stats::sample_sd(per_case);
        if (!words.empty()) {
            row.words_mean = stats::mean(words);
            row.words_sd = stats::sample_sd(words);
        }
        return row;
    };

    std::vector<SummaryRow> rows;
    rows.push_back(make_row("Feedback", "Instances", [](const FeedbackInstance&) { return true; }));
    // Display order groups trainee reactions before trainer reactions.
    const std::pair<const char*, Outcome> order[] = {
        {"Trainee Behavior", Outcome::VerbalAcknowledgment},
        {"Trainee Behavior", Outcome::BehaviorAdjustment},
        {"Trainer Reaction", Outcome::TrainerApproval},
        {"Trainer Reaction", Outcome::TrainerDisapproval},
    };
    const bool any_labels = std::any_of(corpus.instances.begin(), corpus.instances.end(),
                                        [](const auto& f) { return f.outcomes.has_value(); });
    if (any_labels) {
        for (const auto& [category, o] : order) {
            rows.push_back(make_row(category, outcome_label(o), [o = o](const FeedbackInstance& f) {
                return f.outcomes && (*f.outcomes)[o] == 1;
            }));
        }
    }
    return rows;
}

CsvTable summary_table(const std::vector<SummaryRow>& rows) {
    CsvTable t;
    t.header = {"category", "dimension", "count", "freq", "count_per_case", "words_per_line"};
    for (const auto& r : rows) {
        t.rows.push_back({r.category, r.dimension, std::to_string(r.count), format_fixed(100.0 * r.frequency, 1) + "%",
                          format_fixed(r.per_case_mean, 1) + " +- " + format_fixed(r.per_case_sd, 1),
                          r.count ? format_fixed(r.words_mean, 1) + " +- " + format_fixed(r.words_sd, 1) : "-"});
    }
    return t;
}

std::vector<std::vector<std::string>> sample_discovery_subsets(const Corpus& corpus, int n_agents,
                                                               std::size_t subset_size, std::uint64_t seed) {
    if (n_agents < 1) throw std::invalid_argument("sample_discovery_subsets: n_agents must be positive");
    if (subset_size < 1) throw std::invalid_argument("sample_discovery_subsets: subset_size must be positive");
    if (subset_size > corpus.size())
        throw DataError("subset_size " + std::to_string(subset_size) + " exceeds corpus size " +
                        std::to_string(corpus.size()));
    std::vector<std::vector<std::string>> out;
    for (int agent = 1; agent <= n_agents; ++agent) {
        Rng rng(seed, "discovery-subset", static_cast<std::uint64_t>(agent));
        auto idx = rng.sample_without_replacement(corpus.size(), subset_size);
        std::sort(idx.begin(), idx.end());
        std::vector<std::string> ids;
        ids.reserve(idx.size());
        for (auto i : idx) ids.push_back(corpus.instances[i].id);
        out.push_back(std::move(ids));
    }
    return out;
}

} // namespace rubricforge
