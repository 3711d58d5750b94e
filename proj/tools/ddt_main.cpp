#include <iostream>

#include "ddt/cli.hpp"

int main(int argc, char** argv) { return ddt::run_cli(argc, argv, std::cout, std::cerr); }
