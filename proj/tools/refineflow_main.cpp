#include <iostream>

#include "refineflow/cli.hpp"

int main(int argc, char** argv) {
  return refineflow::cli::main_entry(argc, argv, std::cout, std::cerr);
}
