#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace elastic::cli {

// args excludes the program name. Returns the process exit status; module
// errors are reported on err as a one-line JSON record.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elastic::cli
