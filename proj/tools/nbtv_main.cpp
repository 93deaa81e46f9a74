#include <iostream>

#include "nbtv/cli.hpp"

int main(int argc, char** argv) { return nbtv::cli_main(argc, argv, std::cout, std::cerr); }
