#include <iostream>
#include <string>
#include <vector>

#include "msearch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return msearch::cli::run_command(args, std::cout, std::cerr);
}
