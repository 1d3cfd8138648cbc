#pragma once

#include <iosfwd>

#include "stratrand/keyval.hpp"

namespace stratrand {

// Subcommand entry points shared by the CLI binary and the tests. Each takes
// a merged configuration (file entries overridden by flags), writes reports
// to `out` and diagnostics to `err`, and returns a process exit code:
// 0 success, 2 configuration error, 3 data/estimation error.
int cmd_simulate(const KeyVal& cfg, std::ostream& out, std::ostream& err);
int cmd_analyze(const KeyVal& cfg, std::ostream& out, std::ostream& err);
int cmd_randomize(const KeyVal& cfg, std::ostream& out, std::ostream& err);
int cmd_diagnose(const KeyVal& cfg, std::ostream& out, std::ostream& err);

} // namespace stratrand
