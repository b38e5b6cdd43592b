#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return vsrtp::cli::run(argc, argv, std::cout, std::cerr);
}
