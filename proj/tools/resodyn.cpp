#include <iostream>

#include "resodyn/cli.hpp"

int main(int argc, char** argv) {
    return resodyn::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
