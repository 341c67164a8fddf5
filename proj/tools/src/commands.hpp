#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "options.hpp"

namespace lognnet::cli {

inline constexpr int kManifestFormatVersion = 1;

/// Parses argv into options. "replay" is resolved here: the options come
/// from the report's manifest. Throws Error(kUsage) on bad arguments.
/// Returns false when help was printed and there is nothing to run.
bool parse_command_line(const std::vector<std::string>& args, RunOptions& out,
                        std::ostream& help);

/// Runs one command and writes its report and side files under o.out.
/// Returns the report path.
std::filesystem::path execute(const RunOptions& o, std::ostream& log);

/// Whole front end: parse, execute, map errors to a single line on `err` and
/// an exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lognnet::cli
