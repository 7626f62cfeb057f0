#include <iostream>

#include "kolmonet/harness.hpp"

int main(int argc, char** argv) {
  return kolmonet::run_cli(argc, argv, std::cout, std::cerr);
}
