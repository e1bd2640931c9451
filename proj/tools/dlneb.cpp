#include "dlneb/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dlneb::cli::run(argc, argv, std::cout, std::cerr); }
