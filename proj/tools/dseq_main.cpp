#include <iostream>

#include "dseq/cli.hpp"

int main(int argc, char** argv) { return dseq::cli::run(argc, argv, std::cout, std::cerr); }
