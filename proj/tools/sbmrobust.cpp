#include "sbmrobust/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return sbmrobust::run_cli(argc, argv, std::cout, std::cerr);
}
