#include "rubricforge/discovery/discovery.hpp"

#include "rubricforge/util/io.hpp"
#include "rubricforge/util/parallel.hpp"

#include <json.hpp>

namespace rubricforge::discovery {

using nlohmann::ordered_json;

void DiscoveryOptions::validate() const {
    if (n_agents < 1) throw ConfigError("n_agents must be at least 1");
    if (subset_size < 1) throw ConfigError("subset_size must be at least 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("discovery temperature must lie in [0, 2]");
    if (max_criteria < 1) throw ConfigError("max_criteria must be at least 1");
    if (concurrency < 1) throw ConfigError("discovery concurrency must be at least 1");
    if (outcomes.empty()) throw ConfigError("at least one outcome definition is required");
}

std::vector<CandidateCriterion> DiscoveryResult::criteria() const {
    std::vector<CandidateCriterion> out;
    for (const auto& r : runs) out.insert(out.end(), r.criteria.begin(), r.criteria.end());
    return out;
}

DiscoveryResult run_discovery(llm::LlmClient& client, const Corpus& corpus, const DiscoveryOptions& options) {
    options.validate();
    if (corpus.size() < options.subset_size)
        throw DataError("corpus has " + std::to_string(corpus.size()) + " instances, fewer than subset_size " +
                        std::to_string(options.subset_size));
    const auto subsets = sample_discovery_subsets(corpus, options.n_agents, options.subset_size, options.seed);
    DiscoveryResult result;
    result.options = options;
    result.runs.resize(static_cast<std::size_t>(options.n_agents));
    parallel_for(result.runs.size(), options.concurrency, [&](std::size_t a) {
        AgentRun& run = result.runs[a];
        run.agent_id = static_cast<int>(a) + 1;
        run.subset_ids = subsets[a];
        std::vector<std::string> examples;
        for (const auto& id : run.subset_ids) examples.push_back(corpus.instances[*corpus.index_of(id)].text);
        llm::CompletionRequest req;
        req.model_id = options.model_id;
        req.temperature = options.temperature;
        req.messages = llm::render_discovery_prompt(options.outcomes, examples);
        req.replicate_tag = "agent-" + std::to_string(run.agent_id) + "/seed-" + std::to_string(options.seed);
        run.fingerprint = llm::prompt_fingerprint(req.messages);
        run.cache_key = llm::cache_key(client.backend_id(), req);
        const auto resp = client.complete(req);
        try {
            auto parsed = llm::parse_criteria_rows(resp.text);
            run.skipped = std::move(parsed.skipped);
            for (const auto& row : parsed.rows) {
                if (run.criteria.size() >= options.max_criteria) {
                    ++run.dropped;
                    continue;
                }
                CandidateCriterion c;
                c.agent_id = run.agent_id;
                c.ordinal = static_cast<int>(run.criteria.size()) + 1;
                c.name = row.name;
                c.definition = row.definition;
                c.anchors = {row.anchor1, row.anchor3, row.anchor5};
                run.criteria.push_back(std::move(c));
            }
        } catch (const ParseError& e) {
            run.error = e.what();
            run.raw = resp.text;
        }
    });
    std::string failed;
    for (const auto& r : result.runs)
        if (!r.ok()) failed += (failed.empty() ? "" : ", ") + std::to_string(r.agent_id);
    if (!failed.empty()) throw DiscoveryError("discovery agent(s) " + failed + " produced no criteria", result);
    return result;
}

std::string format_discovery_json(const DiscoveryResult& result) {
    const auto& o = result.options;
    ordered_json j;
    j["options"] = {{"n_agents", o.n_agents},       {"subset_size", o.subset_size},
                    {"temperature", o.temperature}, {"seed", o.seed},
                    {"model_id", o.model_id},       {"max_criteria", o.max_criteria}};
    ordered_json outcomes = ordered_json::array();
    for (const auto& od : o.outcomes) outcomes.push_back({{"label", od.label}, {"description", od.description}});
    j["options"]["outcomes"] = outcomes;
    ordered_json runs = ordered_json::array();
    for (const auto& r : result.runs) {
        ordered_json jr;
        jr["agent_id"] = r.agent_id;
        jr["subset_ids"] = r.subset_ids;
        jr["fingerprint"] = r.fingerprint;
        jr["cache_key"] = r.cache_key;
        ordered_json crit = ordered_json::array();
        for (const auto& c : r.criteria)
            crit.push_back({{"ref", c.ref()},
                            {"ordinal", c.ordinal},
                            {"name", c.name},
                            {"definition", c.definition},
                            {"anchors", {{"1", c.anchors[0]}, {"3", c.anchors[1]}, {"5", c.anchors[2]}}}});
        jr["criteria"] = crit;
        ordered_json skipped = ordered_json::array();
        for (const auto& s : r.skipped) skipped.push_back({{"line", s.line}, {"reason", s.reason}, {"raw", s.raw}});
        jr["skipped"] = skipped;
        jr["dropped"] = r.dropped;
        if (r.error) {
            jr["error"] = *r.error;
            jr["raw"] = r.raw;
        }
        runs.push_back(jr);
    }
    j["runs"] = runs;
    return j.dump(2) + "\n";
}

DiscoveryResult parse_discovery_json(std::string_view text) {
    DiscoveryResult out;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("options")) {
            const auto& o = j["options"];
            out.options.n_agents = o.value("n_agents", out.options.n_agents);
            out.options.subset_size = o.value("subset_size", out.options.subset_size);
            out.options.temperature = o.value("temperature", out.options.temperature);
            out.options.seed = o.value("seed", out.options.seed);
            out.options.model_id = o.value("model_id", out.options.model_id);
            out.options.max_criteria = o.value("max_criteria", out.options.max_criteria);
            if (o.contains("outcomes")) {
                out.options.outcomes.clear();
                for (const auto& od : o["outcomes"])
                    out.options.outcomes.push_back({od.at("label").get<std::string>(), od.at("description").get<std::string>()});
            }
        }
        for (const auto& jr : j.at("runs")) {
            AgentRun r;
            r.agent_id = jr.at("agent_id").get<int>();
            r.subset_ids = jr.value("subset_ids", std::vector<std::string>{});
            r.fingerprint = jr.value("fingerprint", "");
            r.cache_key = jr.value("cache_key", "");
            for (const auto& jc : jr.at("criteria")) {
                CandidateCriterion c;
                c.agent_id = r.agent_id;
                c.ordinal = jc.at("ordinal").get<int>();
                c.name = jc.at("name").get<std::string>();
                c.definition = jc.at("definition").get<std::string>();
                const auto& an = jc.at("anchors");
                c.anchors = {an.at("1").get<std::string>(), an.at("3").get<std::string>(), an.at("5").get<std::string>()};
                if (trim(c.name).empty() || trim(c.definition).empty())
                    throw DataError("criterion " + c.ref() + " has an empty name or definition");
                r.criteria.push_back(std::move(c));
            }
            if (jr.contains("skipped"))
                for (const auto& s : jr["skipped"])
                    r.skipped.push_back({s.value("line", std::size_t{0}), s.value("reason", ""), s.value("raw", "")});
            r.dropped = jr.value("dropped", std::size_t{0});
            if (jr.contains("error")) {
                r.error = jr["error"].get<std::string>();
                r.raw = jr.value("raw", "");
            }
            out.runs.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed discovery file: ") + e.what());
    }
    return out;
}

void write_discovery(const std::filesystem::path& path, const DiscoveryResult& result) {
    write_text_file_atomic(path, format_discovery_json(result));
}

DiscoveryResult read_discovery(const std::filesystem::path& path) {
    try {
        return parse_discovery_json(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace rubricforge::discovery
