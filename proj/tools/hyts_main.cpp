#include <iostream>

#include "hyts/cli.hpp"

int main(int argc, char** argv) {
    return hyts::cli_main(argc, argv, std::cout, std::cerr);
}
