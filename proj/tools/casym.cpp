#include <iostream>

#include "casym/cli.hpp"

int main(int argc, char** argv) {
    return casym::run_cli(argc, argv, std::cout, std::cerr);
}
