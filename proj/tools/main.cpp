#include <iostream>
#include <string>
#include <vector>

#include "behavior_codec/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return behavior_codec::run_cli(args, std::cout, std::cerr);
}
