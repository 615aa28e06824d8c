#include <iostream>

#include "elastic/cli.hpp"

int main(int argc, char** argv) {
    return elastic::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
