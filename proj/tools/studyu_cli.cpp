#include <iostream>

#include "studyu/cli.hpp"

int main(int argc, char** argv) { return studyu::run_cli(argc, argv, std::cout, std::cerr); }
