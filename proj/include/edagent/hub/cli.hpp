#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace edagent::hub {

/// Exit codes: 0 success, 1 user error, 2 infrastructure error.
int cli_main(const std::vector<std::string>& args, std::istream& in = std::cin, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace edagent::hub
