#include <iostream>

#include "ccpj/cli/commands.hpp"

int main(int argc, char** argv) { return ccpj::cli::run(argc, argv, std::cout, std::cerr); }
