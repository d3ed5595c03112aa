#pragma once

namespace forge::cli {

// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const* argv);

}  // namespace forge::cli
