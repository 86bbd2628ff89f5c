#include <iostream>

#include "cascademl/cli.hpp"

int main(int argc, char** argv) {
    return cascademl::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
