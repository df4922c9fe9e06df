#ifndef ORBITDP_TOOLS_CLI_H_
#define ORBITDP_TOOLS_CLI_H_

#include <iosfwd>

namespace orbitdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitFlagged = 3;

// Runs one orbitdp command line. Artifacts go to --out when given and to
// `out` otherwise; messages and warnings go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace orbitdp::cli

#endif  // ORBITDP_TOOLS_CLI_H_
