#include <gapblock/cli.hpp>

int main(int argc, char** argv) { return gapblock::cli::main(argc, argv); }
