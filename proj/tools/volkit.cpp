#include <iostream>

#include "volkit/cli.hpp"

int main(int argc, char** argv) { return volkit::cli::dispatch(argc, argv, std::cout, std::cerr); }
