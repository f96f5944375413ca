#include <iostream>

#include "hubsim/cli.hpp"

int main(int argc, char** argv) { return hubsim::run_cli(argc, argv, std::cout, std::cerr); }
