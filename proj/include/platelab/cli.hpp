#pragma once

#include <string>
#include <vector>

namespace platelab {

/// Entry point of plate_lab. Returns 0 on success, 1 on validation errors and 2 on
/// solver failures.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace platelab
