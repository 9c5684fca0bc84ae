#include "fxmf/cli.hpp"

int main(int argc, char** argv) { return fxmf::cli::main(argc, argv); }
