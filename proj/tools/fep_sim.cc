#include "fep/cli.h"

#include <iostream>

int
main(int argc, char** argv)
{
    return fep::RunCli(argc, argv, std::cout, std::cerr);
}
