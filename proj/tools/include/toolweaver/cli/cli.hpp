#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toolweaver::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;  ///< validation or configuration error
inline constexpr int kExitRuntime = 2; ///< backend or I/O failure

/// Entry point of the toolweaver command; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

} // namespace toolweaver::cli
