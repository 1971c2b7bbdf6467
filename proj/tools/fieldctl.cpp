#include <iostream>

#include "fieldctl/cli.hpp"

int main(int argc, char** argv)
{
    return fieldctl::cli_main(argc, argv, std::cout, std::cerr);
}
