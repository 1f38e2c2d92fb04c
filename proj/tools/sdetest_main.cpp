#include <iostream>

#include "sdetest/cli.hpp"

int main(int argc, char** argv) {
    return sdetest::run_cli(argc, argv, std::cout, std::cerr);
}
