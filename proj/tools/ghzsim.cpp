#include <iostream>
#include <string>
#include <vector>

#include "ghzsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ghzsim::run_cli(args, std::cout, std::cerr);
}
