#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return continuum::cli::run(argc, argv, std::cout, std::cerr); }
