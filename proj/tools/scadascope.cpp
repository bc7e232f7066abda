#include <iostream>
#include <string>
#include <vector>

#include "scadascope/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scadascope::cli::run(args, std::cout, std::cerr);
}
