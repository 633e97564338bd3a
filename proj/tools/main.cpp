#include <iostream>

#include "resbuild/cli.hpp"

int main(int argc, char** argv) { return resbuild::cli::run(argc, argv, std::cout, std::cerr); }
