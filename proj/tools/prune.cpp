#include <iostream>

#include "prune/cli.hpp"

int main(int argc, char** argv) {
  return prune::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
