#include "intbo/cli.hpp"

int main(int argc, char** argv) { return intbo::cli::main(argc, argv); }
