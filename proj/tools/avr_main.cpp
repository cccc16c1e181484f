#include <iostream>

#include "avr/cli/cli.hpp"

int main(int argc, char** argv) { return avr::cli::dispatch(argc, argv, std::cout, std::cerr); }
