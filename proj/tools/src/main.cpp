#include <iostream>

#include "mesokit/cli.hpp"

int main(int argc, char** argv) { return mesokit::cli::run(argc, argv, std::cout, std::cerr); }
