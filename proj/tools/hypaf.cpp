#include "hypaf/cli.hpp"

int main(int argc, char** argv) { return hypaf::cli::main(argc, argv); }
