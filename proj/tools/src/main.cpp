#include <iostream>

#include "uwh/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uwh::cli::run(args, std::cout, std::cerr);
}
