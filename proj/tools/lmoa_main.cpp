#include <iostream>

#include "lmoa/cli.hpp"

int main(int argc, char** argv)
{
    return lmoa::cli::run(argc, argv, std::cout, std::cerr);
}
