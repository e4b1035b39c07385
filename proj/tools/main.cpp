#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return exchkit::cli::run(std::vector<std::string>(argv, argv + argc), std::cin, std::cout, std::cerr);
}
