#include <zonemem/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return zonemem::cli::run(argc, argv, std::cout, std::cerr); }
