#include "resonance/cli.hpp"

int main(int argc, char** argv)
{
    return resonance::cli::main_entry(argc, argv);
}
