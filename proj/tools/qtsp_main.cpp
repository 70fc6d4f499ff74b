#include <qtsp/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return qtsp::cli::run(argc, argv, std::cout, std::cerr); }
