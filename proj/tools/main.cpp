#include <iostream>
#include <string>
#include <vector>

#include "hsc/cli.hpp"

int main(int argc, char** argv) {
  return hsc::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
