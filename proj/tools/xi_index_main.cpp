#include <iostream>

#include "xi_index/harness/cli.hpp"

int main(int argc, char** argv) { return xidx::harness::run_cli(argc, argv, std::cout, std::cerr); }
