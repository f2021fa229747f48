#include "promptloop/harness/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::harness {

namespace {

std::string as_text(const nlohmann::json& v, const char* field, std::size_t line) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw ParseError(std::string("field '") + field + "' must be a string", line);
}

}  // namespace

std::vector<core::LabeledExample> parse_dataset(std::istream& in, const std::string& task_id) {
    std::vector<core::LabeledExample> out;
    std::set<std::string> ids;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (core::text::trim(raw).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line);
        }
        if (!j.is_object()) throw ParseError("record is not a JSON object", line);
        for (const char* field : {"input", "target"})
            if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'", line);

        core::LabeledExample e;
        e.input = as_text(j.at("input"), "input", line);
        e.target = as_text(j.at("target"), "target", line);
        e.id = j.contains("id") ? as_text(j.at("id"), "id", line) : "seed-" + std::to_string(line);
        e.task = task_id;
        e.provenance = core::Provenance::seed;
        e.difficulty = 0;
        try {
            core::validate(e);
        } catch (const ConfigError& err) {
            throw ParseError(err.what(), line);
        }
        if (!ids.insert(e.id).second) throw ConfigError("duplicate example id '" + e.id + "' on line " + std::to_string(line));
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ConfigError("dataset is empty");
    return out;
}

std::vector<core::LabeledExample> load_dataset(const std::filesystem::path& path, const std::string& task_id) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset " + path.string());
    return parse_dataset(in, task_id);
}

}  // namespace promptloop::harness
