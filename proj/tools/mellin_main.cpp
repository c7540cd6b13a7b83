#include "mellin/cli.hpp"

int main(int argc, char** argv) { return mellin::cli_main(argc, argv); }
