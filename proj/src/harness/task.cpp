#include "promptloop/harness/task.hpp"

#include <fstream>
#include <sstream>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/harness/dataset.hpp"

namespace promptloop::harness {

core::TaskSpec parse_task_spec(const nlohmann::json& j) {
    core::TaskSpec t;
    try {
        t.id = j.at("id").get<std::string>();
        t.description = j.at("description").get<std::string>();
        if (j.contains("label_space") && !j.at("label_space").is_null())
            t.label_space = j.at("label_space").get<std::vector<std::string>>();
        if (j.contains("answer_format")) t.answer_format = core::parse_answer_format(j.at("answer_format").get<std::string>());
        t.difficulty_max = j.value("difficulty_max", 10);
        t.geometry = j.value("geometry", false);
        t.voters = j.value("voters", false);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("task spec: ") + e.what());
    }
    if (t.id.empty()) throw ConfigError("task spec has an empty id");
    return t;
}

TaskBundle load_task(const std::filesystem::path& data_dir, const std::string& id) {
    TaskBundle b;
    b.dir = data_dir / "tasks" / id;
    if (!std::filesystem::is_directory(b.dir)) throw ConfigError("unknown task '" + id + "' (no " + b.dir.string() + ")");

    std::ifstream spec_in(b.dir / "task.json");
    if (!spec_in) throw ConfigError("missing task.json for task '" + id + "'");
    nlohmann::json j;
    try {
        spec_in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("task.json for '" + id + "': " + e.what());
    }
    b.spec = parse_task_spec(j);
    if (b.spec.id != id) throw ConfigError("task.json id '" + b.spec.id + "' does not match directory '" + id + "'");

    try {
        b.seeds = load_dataset(b.dir / "seeds.jsonl", id);
    } catch (const ParseError& e) {
        throw ConfigError("seeds for '" + id + "': " + e.what());
    }
    core::validate(b.spec, b.seeds);

    std::ifstream prompt_in(b.dir / "initial_prompt.txt");
    if (!prompt_in) throw ConfigError("missing initial_prompt.txt for task '" + id + "'");
    std::stringstream ss;
    ss << prompt_in.rdbuf();
    b.initial_prompt = std::string(core::text::trim(ss.str()));
    if (b.initial_prompt.empty()) throw ConfigError("initial prompt for '" + id + "' is empty");

    if (std::filesystem::exists(b.dir / "mock.json")) b.mock_script = b.dir / "mock.json";
    return b;
}

std::filesystem::path resolve_template(const TaskBundle& task, const std::filesystem::path& template_dir,
                                       const std::string& name) {
    auto own = task.dir / name;
    if (!task.dir.empty() && std::filesystem::exists(own)) return own;
    return template_dir / name;
}

}  // namespace promptloop::harness
