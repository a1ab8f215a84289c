#include "mixstyle_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return mixstyle::cli::run_cli(args);
}
