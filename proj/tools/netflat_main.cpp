#include "netflat/cli_runner.hpp"

int main(int argc, char** argv) { return netflat::run_cli(argc, argv); }
