#include "srnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return srnet::dispatch(argc, argv, std::cout, std::cerr); }
