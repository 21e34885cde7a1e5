#include <iostream>

#include "regsum/cli.hpp"

int main(int argc, char** argv) { return regsum::run_cli(argc, argv, std::cout, std::cerr); }
