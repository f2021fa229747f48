#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "promptloop/core/types.hpp"

namespace promptloop::harness {

/// Reads seed examples from JSONL records {input, target, id?, ...}. Blank
/// lines are skipped, numeric targets are accepted as text and missing ids
/// become "seed-<line>". Throws ParseError (with the line number) for a bad
/// record and ConfigError for an unreadable or empty file or a duplicate id.
std::vector<core::LabeledExample> load_dataset(const std::filesystem::path& path, const std::string& task_id = {});
std::vector<core::LabeledExample> parse_dataset(std::istream& in, const std::string& task_id = {});

}  // namespace promptloop::harness
