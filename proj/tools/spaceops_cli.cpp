#include "spaceops/harness.hpp"

int main(int argc, char **argv)
{
    return spaceops::cli(argc, argv);
}
