#include "kpzlab/cli.hpp"

int main(int argc, char** argv) { return kpzlab::cli::main(argc, argv); }
