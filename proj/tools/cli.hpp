#ifndef BWSHARE_TOOLS_CLI_HPP
#define BWSHARE_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace bwshare::cli {

// Version tag written into the header of every output file.
inline constexpr const char* kSchemaVersion = "bwshare/1";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigInvalid = 2;

// Runs one invocation. args excludes the program name. Reports go to out (or
// to --out), errors are written to err as a single JSON object.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bwshare::cli

#endif  // BWSHARE_TOOLS_CLI_HPP
