#include <string>
#include <vector>

#include "ftadsim/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ftadsim::cli::run_cli(args);
}
