#include "edmp/cli.hpp"

int main(int argc, char** argv) { return edmp::cli::main(argc, argv); }
