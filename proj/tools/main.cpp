#include <iostream>

#include "lightpos/cli.hpp"

int main(int argc, char** argv) {
  return lightpos::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
