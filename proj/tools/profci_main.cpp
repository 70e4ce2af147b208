#include "profci/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return profci::run_cli(argc, argv, std::cout, std::cerr);
}
