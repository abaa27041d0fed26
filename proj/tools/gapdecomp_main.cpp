#include "gapdecomp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gapdecomp::cli::run(argc, argv, std::cout, std::cerr); }
