#include <iostream>

#include "tdiv/cli.hpp"

int main(int argc, char** argv) { return tdiv::cli::run_cli(argc, argv, std::cout, std::cerr); }
