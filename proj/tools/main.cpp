#include <iostream>

#include "rvqmotion/cli/cli.h"

int main(int argc, char** argv) {
  return rvqmotion::run_cli(argc, argv, std::cout, std::cerr);
}
