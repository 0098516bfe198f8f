#include "ptmesh/cli.hpp"

#include <iostream>

int main(int argc, char ** argv) { return ptmesh::run_cli(argc, argv, std::cout, std::cerr); }
