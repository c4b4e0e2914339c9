#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace isden::cli {

// The config file named on the command line could not be opened.
struct ConfigPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// `key = value` lines; '#' starts a comment. Keys are long flag names
// without the leading dashes. Throws std::runtime_error on malformed lines.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

// Returns `args` with `--key value` prepended for every config entry whose
// flag is not already on the command line. Handles `--config PATH` and
// `--config=PATH`; the config flag itself is removed.
std::vector<std::string> merge_config(const std::vector<std::string>& args);

}  // namespace isden::cli
