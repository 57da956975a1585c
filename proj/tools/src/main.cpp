#include <iostream>

#include "cogdep_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return cogdep::cli::run(args, std::cout, std::cerr);
}
