#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace srnet {

/// Runs one subcommand (synth, train, edit, erase, eval, demo-grid).
/// Returns 0 on success, 1 on a runtime failure and 2 on a usage or
/// configuration error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srnet
