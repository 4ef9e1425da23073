#include <iostream>
#include <string>
#include <vector>

#include "rolekit/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rolekit::cli::run(args, std::cout, std::cerr);
}
