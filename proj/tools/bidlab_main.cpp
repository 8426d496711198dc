#include <iostream>
#include <string>
#include <vector>

#include "bidlab/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bidlab::run_cli(args, std::cout, std::cerr);
}
