#include <iostream>
#include <string>
#include <vector>

#include "dss/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dss::run(args, std::cout, std::cerr);
}
