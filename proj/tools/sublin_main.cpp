#include <iostream>

#include "sublin/cli.hpp"

int main(int argc, char** argv) {
  return sublin::cli_run(argc, argv, std::cout, std::cerr);
}
