#include "fsspack/cli.hpp"

int main(int argc, char** argv) { return fsspack::cli::run_cli(argc, argv); }
