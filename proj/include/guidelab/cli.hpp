#pragma once

namespace guidelab {

// Full command-line driver: subcommands run, compare, landscape, cagrad-bench,
// selftest. Returns the process exit code: 0 success, 1 config error,
// 2 runtime failure, 3 selftest failure.
int cli_main(int argc, const char* const* argv);

}  // namespace guidelab
