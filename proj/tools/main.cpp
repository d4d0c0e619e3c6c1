#include "run.hpp"

#include <iostream>

int main(int argc, char** argv) { return thinlayer::cli::run_main(argc, argv, std::cout, std::cerr); }
