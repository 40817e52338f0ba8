#include "mickit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return mickit::run_cli(argc, argv, std::cout, std::cerr);
}
