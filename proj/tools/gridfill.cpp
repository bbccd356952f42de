#include <iostream>
#include <string>
#include <vector>

#include "gridfill/cli.hpp"
#include "gridfill/parallel.hpp"

int main(int argc, char** argv) {
  gridfill::configure_allocator();
  std::vector<std::string> args(argv + 1, argv + argc);
  return gridfill::run_cli(args, std::cout, std::cerr);
}
