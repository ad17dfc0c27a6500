#include <iostream>

#include "sig/cli.hpp"

int main(int argc, char** argv) {
  return sig::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
