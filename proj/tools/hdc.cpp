#include <iostream>

#include "hdc/cli/commands.hpp"

int main(int argc, char** argv) { return hdc::cli::run(argc, argv, std::cout, std::cerr); }
