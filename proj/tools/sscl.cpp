#include "sscl/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return sscl::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout);
}
