#include "pmp/cli.hpp"

int main(int argc, char** argv) { return pmp::cli::main(argc, argv); }
