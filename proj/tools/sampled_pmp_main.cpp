#include <iostream>

#include "sampled_pmp/cli.hpp"

int main(int argc, char** argv) {
  return sampled_pmp::cli::run(argc, argv, std::cout, std::cerr);
}
