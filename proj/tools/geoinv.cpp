#include <iostream>

#include "geoinv/cli.hpp"

int main(int argc, char** argv) { return geoinv::cli::run(argc, argv, std::cout, std::cerr); }
