#include <iostream>
#include <string>
#include <vector>

#include "underloc/cli/commands.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return underloc::cli::run_cli(args, std::cout, std::cerr);
}
