#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "aaerec/corpus.hpp"
#include "aaerec/error.hpp"

namespace aaerec {

inline constexpr const char* kVersion = "0.1.0";

struct RunCommand {
  std::filesystem::path config;
};
struct SynthCommand {
  SyntheticParams params;
  std::filesystem::path out_dir;
};
struct GradcheckCommand {
  std::uint64_t seed = 0;
};
struct VersionCommand {};
/// --help anywhere; carries the rendered text.
struct HelpCommand {
  std::string text;
};

using CliCommand = std::variant<RunCommand, SynthCommand, GradcheckCommand, VersionCommand, HelpCommand>;

/// Bad command line. what() holds the message, usage() the help text.
class UsageError : public Error {
 public:
  UsageError(const std::string& what, std::string usage) : Error(what), usage_(std::move(usage)) {}
  const std::string& usage() const { return usage_; }

 private:
  std::string usage_;
};

/// `args` excludes the program name.
CliCommand parse_args(const std::vector<std::string>& args);

/// 0 on success, 1 on runtime errors, 2 on usage errors. Progress goes to
/// `err`, command output to `out`.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes via a sibling temp file and rename, so readers never see a partial
/// file.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace aaerec
