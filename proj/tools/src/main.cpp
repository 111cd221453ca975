#include <iostream>
#include <string>
#include <vector>

#include "spinfid/cli/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return spinfid::cli::run_command(args, std::cout, std::cerr);
}
