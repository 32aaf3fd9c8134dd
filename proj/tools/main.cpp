#include <iostream>
#include <string>
#include <vector>

#include "vortexlab/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  vortexlab::RunConfig config;
  try {
    config = vortexlab::parse_config(args);
  } catch (const vortexlab::HelpRequested& help) {
    std::cout << help.what();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return vortexlab::run(config, std::cout, std::cerr);
}
