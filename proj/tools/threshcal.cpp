#include <iostream>
#include <string>
#include <vector>

#include "threshcal/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return threshcal::run_cli(args, std::cout, std::cerr);
}
