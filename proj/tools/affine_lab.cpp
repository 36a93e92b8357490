#include <iostream>

#include "affine/cli.hpp"

int main(int argc, char** argv) { return affine::run_cli(argc, argv, std::cout, std::cerr); }
