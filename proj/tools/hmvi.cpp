#include "hmvi/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return hmvi::cli::run(argc, argv, std::cout, std::cerr);
}
