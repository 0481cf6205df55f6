#include <iostream>

#include "lcner/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lcner::cli::run(args, std::cout, std::cerr);
}
