#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return bwshare::cli::RunCli({argv + 1, argv + argc}, std::cout, std::cerr);
}
