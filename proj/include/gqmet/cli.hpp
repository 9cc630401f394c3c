#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gqmet::cli {

enum ExitCode : int { kOk = 0, kInvalidArgs = 1, kUnphysical = 2, kNumerical = 3 };

// Flat "key = value" lines; '#' starts a comment. Throws MalformedInput on a bad line.
struct ConfigFile {
  std::vector<std::pair<std::string, std::string>> entries;  // file order
  std::vector<std::string> lines;                             // the entry lines verbatim
};

ConfigFile parse_config(const std::string& text);

/// Appends "--key value" for every config entry whose flag is not already on
/// the command line, so flags override the file.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const ConfigFile& config);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gqmet::cli
