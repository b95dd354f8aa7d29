#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kinmax::cli {

/// Runs one subcommand. args[0] is the program name. Returns 0 on success,
/// 2 on usage errors and 1 on domain or solver errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinmax::cli
