#include <iostream>

#include "ddctl/cli.hpp"

int main(int argc, char** argv) { return ddctl::cli::run(argc, argv, std::cout, std::cerr); }
