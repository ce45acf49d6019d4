#include <iostream>
#include <string>
#include <vector>

#include "slq/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slq::cli::Run(args, std::cout, std::cerr);
}
