#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace enclosure {

// Entry point shared by the executable and the tests. Exit code 0 on success;
// failures print one line "error code=<Name> message=<text>" to err.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace enclosure
