#include "hjb/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hjb::cli::run(argc, argv, std::cout, std::cerr); }
