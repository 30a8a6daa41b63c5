#include <iostream>
#include <string>
#include <vector>

#include "fedsynth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fedsynth::run_cli(args, std::cout, std::cerr);
}
