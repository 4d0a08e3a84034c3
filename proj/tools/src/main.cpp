#include <iostream>
#include <string>
#include <vector>

#include "harmonica_cli/cli.hpp"

int main(int argc, char** argv) {
  return harmonica::cli::run(std::vector<std::string>(argv, argv + argc), std::cerr);
}
