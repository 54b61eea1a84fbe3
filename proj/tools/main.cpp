#include "softwrist/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return softwrist::cli::run(argc, argv, std::cout, std::cerr); }
