#include <iostream>

#include "ovd/cli.hpp"

int main(int argc, char** argv) { return ovd::run(argc, argv, std::cout, std::cerr); }
