#include <iostream>

#include "rescrb/cli.hpp"

int main(int argc, char** argv) { return rescrb::cli::dispatch(argc, argv, std::cout, std::cerr); }
