#include <string>
#include <vector>

#include "kite/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kite::cli_dispatch(args);
}
