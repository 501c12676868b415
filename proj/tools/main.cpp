#include "edsvm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return edsvm::run_cli(argc, argv, std::cout, std::cerr); }
