#include <iostream>

#include "lss/cli.hpp"

int main(int argc, char** argv) { return lss::cli::run_cli(argc, argv, std::cout, std::cerr); }
