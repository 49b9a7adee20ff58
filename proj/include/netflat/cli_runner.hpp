#pragma once

namespace netflat {

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace netflat
