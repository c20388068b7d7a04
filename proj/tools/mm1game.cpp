#include <iostream>

#include "mm1game/cli.hpp"

int main(int argc, char** argv) { return mm1game::cli::run(argc, argv, std::cout, std::cerr); }
