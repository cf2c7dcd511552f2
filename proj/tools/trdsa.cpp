#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "trdsa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  trdsa::cli::Environment env;
  env.interactive = isatty(STDIN_FILENO) != 0;
  env.default_parallelism = trdsa::cli::default_parallelism();
  return trdsa::cli::run(std::move(args), std::cout, std::cerr, env);
}
