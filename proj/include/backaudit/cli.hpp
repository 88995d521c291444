#pragma once

#include <string>
#include <vector>

namespace backaudit::cli {

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Exit codes: 0 ok, 2 configuration, 3 data,
/// 4 diagnostic or verification failure.
int run(const std::vector<std::string>& args);

}  // namespace backaudit::cli
