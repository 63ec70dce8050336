#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>

namespace seqthink::demos {

struct UnknownDemo : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Runs the named demo, narrating to `out`. Canned scenarios are loaded
/// from `dir`. Returns 0 when the demo shows what it is meant to show.
int run(const std::string& name, const std::filesystem::path& dir, std::ostream& out);

}  // namespace seqthink::demos
