#include <iostream>
#include <string>
#include <vector>

#include "aaerec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return aaerec::run_main(args, std::cout, std::cerr);
}
