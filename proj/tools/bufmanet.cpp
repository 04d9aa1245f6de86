#include <exception>
#include <iostream>

#include "bufmanet/harness.hpp"

int main(int argc, char** argv) {
  try {
    return bufmanet::run_cli(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return bufmanet::kExitConfigError;
  }
}
