#include <vector>

#include "shiftlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return shiftlab::run_cli(args);
}
