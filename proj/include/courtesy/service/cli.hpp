#pragma once

#include <string>
#include <vector>

namespace courtesy::service {

// Entry point of the `courtesy` tool. Returns 0 on success, 2 for usage
// errors (bad flags, bad config values) and 1 for runtime failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace courtesy::service
