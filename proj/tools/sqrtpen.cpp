#include <iostream>

#include "sqrtpen/cli.hpp"

int main(int argc, char** argv) { return sqrtpen::run_cli(argc, argv, std::cout, std::cerr); }
