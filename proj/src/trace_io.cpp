#include "amber/trace_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "amber/errors.hpp"

namespace amber {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError(std::string(what) + ": invalid json");
    return j;
}

void expect_format(const json& j, const std::string& format, const char* what) {
    if (j.value("format", "") != format)
        throw DataError(std::string(what) + ": not a " + format + " document");
    if (j.value("version", 0) != kFormatVersion)
        throw DataError(std::string(what) + ": unsupported version");
}

}  // namespace

std::string trace_to_json(const EliminationTrace& trace) {
    json j;
    j["format"] = "amber-trace";
    j["version"] = kFormatVersion;
    j["units"] = trace.units;
    json iters = json::array();
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const IterationRecord& rec = trace.iterations[i];
        json it;
        it["iteration"] = i + 1;
        it["unit"] = rec.unit;
        it["eliminated"] = rec.eliminated;
        it["candidates"] = rec.scores.candidates;
        it["relevance"] = rec.scores.relevance;
        if (!rec.scores.redundancy.empty()) it["redundancy"] = rec.scores.redundancy;
        it["saliency"] = rec.scores.saliency;
        it["seconds"] = rec.seconds;
        iters.push_back(std::move(it));
    }
    j["iterations"] = std::move(iters);
    j["final_active"] = trace.final_mask.active_indices();
    return j.dump(2) + "\n";
}

EliminationTrace trace_from_json(const std::string& text) {
    json j = parse(text, "trace");
    expect_format(j, "amber-trace", "trace");
    EliminationTrace trace;
    trace.units = j.at("units").get<std::vector<std::vector<std::size_t>>>();
    std::size_t d = 0;
    for (const auto& u : trace.units)
        for (std::size_t f : u) d = std::max(d, f + 1);
    trace.final_mask = FeatureMask(d);
    for (const auto& it : j.at("iterations")) {
        IterationRecord rec;
        rec.unit = it.at("unit").get<std::size_t>();
        rec.eliminated = it.at("eliminated").get<std::vector<std::size_t>>();
        rec.scores.candidates = it.at("candidates").get<std::vector<std::size_t>>();
        rec.scores.relevance = it.at("relevance").get<std::vector<double>>();
        if (it.contains("redundancy"))
            rec.scores.redundancy = it.at("redundancy").get<std::vector<double>>();
        rec.scores.saliency = it.at("saliency").get<std::vector<double>>();
        rec.seconds = it.at("seconds").get<double>();
        for (std::size_t f : rec.eliminated) trace.final_mask.active[f] = 0;
        trace.iterations.push_back(std::move(rec));
    }
    return trace;
}

std::string ranking_to_json(const FeatureRanking& ranking) {
    json j;
    j["format"] = "amber-ranking";
    j["version"] = kFormatVersion;
    j["method"] = ranking.method;
    j["scores"] = ranking.scores;
    j["order"] = ranking.order;
    return j.dump(2) + "\n";
}

FeatureRanking ranking_from_json(const std::string& text) {
    json j = parse(text, "ranking");
    expect_format(j, "amber-ranking", "ranking");
    FeatureRanking r;
    r.method = j.at("method").get<std::string>();
    r.scores = j.at("scores").get<std::vector<double>>();
    r.order = j.at("order").get<std::vector<std::size_t>>();
    return r;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace amber
