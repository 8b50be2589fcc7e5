#include <iostream>

#include "stwall/cli.hpp"

int main(int argc, char** argv) { return stwall::run_cli(argc, argv, std::cout, std::cerr); }
