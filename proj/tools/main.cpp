#include <iostream>

#include "hotelling/cli.hpp"

int main(int argc, char** argv) {
  return hotelling::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
