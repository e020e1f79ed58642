#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crackdet {

/// Exit codes follow BSD sysexits: 0 ok, 2 partial batch failure, 64 usage,
/// 66 unreadable input, 74 output I/O failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace crackdet
