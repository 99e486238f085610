#include <iostream>

#include "robust_fusion/cli.hpp"

int main(int argc, char** argv) { return robust_fusion::run_cli(argc, argv, std::cout, std::cerr); }
