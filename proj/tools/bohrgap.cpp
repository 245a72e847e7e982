#include "bohrgap/cli.hpp"

int main(int argc, char** argv) { return bohrgap::cli::main(argc, argv); }
