#include "qfi/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qfi::cli::run(argc, argv, std::cout, std::cerr); }
