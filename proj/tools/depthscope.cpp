#include <iostream>

#include "depthscope/cli.hpp"

int main(int argc, char** argv)
{
    return depthscope::cli::run(argc, argv, std::cout, std::cerr);
}
