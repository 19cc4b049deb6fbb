#include "admnorm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return admnorm::run_cli(argc, argv, std::cout, std::cerr); }
