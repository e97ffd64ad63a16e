#include "spinbench/cli.hpp"

int main(int argc, char** argv) { return spinbench::cli::run_cli(argc, argv); }
