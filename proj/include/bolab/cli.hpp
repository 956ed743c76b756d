#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bolab {

/// Runs the bo_lab command line. Returns 0 on success, 1 on validation errors (bad flags,
/// missing or invalid inputs; nothing is written), 2 on runtime failures.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output root: $BO_LAB_OUT if set, else "bo_lab_out".
std::string default_output_root();

}  // namespace bolab
