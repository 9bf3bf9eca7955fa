#include <iostream>
#include <string>
#include <vector>

#include "revdetect/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return revdetect::run_command(args, std::cout, std::cerr);
}
