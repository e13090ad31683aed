#include <iostream>

#include "arfdx/cli/cli.hpp"

int main(int argc, char** argv) { return arfdx::cli::run(argc, argv, std::cout, std::cerr); }
