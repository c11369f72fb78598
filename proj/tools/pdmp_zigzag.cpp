#include "zigzag/cli.hpp"

int main(int argc, char** argv) { return zigzag::cli::run_cli(argc, argv); }
