#ifndef AEHCL_TOOLS_CLI_H_
#define AEHCL_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace aehcl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Runs one subcommand (generate, inject, train, score, eval, sweep).
// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace aehcl::cli

#endif  // AEHCL_TOOLS_CLI_H_
